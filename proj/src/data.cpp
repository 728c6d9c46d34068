#include "resflow/data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "resflow/error.hpp"
#include "resflow/io.hpp"
#include "resflow/rng.hpp"

namespace resflow {

namespace {

Eigen::Matrix2d rotation_matrix(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

const Eigen::Matrix2d& psi_rotation() {
  static const Eigen::Matrix2d r = rotation_matrix(std::numbers::pi / 3.0);
  return r;
}

Vector psi_value(const Vector& x) {
  const Eigen::Vector2d y = psi_rotation() * x + Eigen::Vector2d(0.3, 0.2);
  Vector out(2);
  out[0] = y[0] + 2.0 * y[0] * std::exp(y[0] * y[0] - 1.0) - 4.0;
  out[1] = y[1] + 2.0 * y[1] * y[1] * y[1] - 4.5;
  return out;
}

Matrix psi_jacobian(const Vector& x) {
  const Eigen::Vector2d y = psi_rotation() * x + Eigen::Vector2d(0.3, 0.2);
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = 1.0 + 2.0 * std::exp(y[0] * y[0] - 1.0) * (1.0 + 2.0 * y[0] * y[0]);
  d(1, 1) = 1.0 + 6.0 * y[1] * y[1];
  return d * psi_rotation();
}

}  // namespace

TargetMap TargetMap::builtin_psi() {
  TargetMap t(TargetKind::BuiltinPsi, 2, "psi");
  t.value_ = psi_value;
  t.jacobian_ = psi_jacobian;
  return t;
}

TargetMap TargetMap::identity(int dim) {
  if (dim < 1) throw InvalidArgument("identity target: dim must be positive");
  TargetMap t(TargetKind::Identity, dim, "identity");
  t.value_ = [](const Vector& x) { return x; };
  t.jacobian_ = [dim](const Vector&) { return Matrix(Matrix::Identity(dim, dim)); };
  return t;
}

TargetMap TargetMap::custom(int dim, ValueFn value, JacobianFn jacobian, std::string name) {
  if (dim < 1) throw InvalidArgument("custom target: dim must be positive");
  if (!value || !jacobian) throw InvalidArgument("custom target: value and jacobian are required");
  TargetMap t(TargetKind::Custom, dim, std::move(name));
  t.value_ = std::move(value);
  t.jacobian_ = std::move(jacobian);
  return t;
}

TargetMap TargetMap::rotation(double angle) {
  const Matrix r = rotation_matrix(angle);
  return custom(
      2, [r](const Vector& x) { return Vector(r * x); }, [r](const Vector&) { return r; }, "rotation");
}

TargetMap TargetMap::translation(Vector shift) {
  const auto dim = static_cast<int>(shift.size());
  return custom(
      dim, [shift](const Vector& x) { return Vector(x + shift); },
      [dim](const Vector&) { return Matrix(Matrix::Identity(dim, dim)); }, "translation");
}

Vector TargetMap::eval(const Vector& x) const {
  if (x.size() != dim_) throw InvalidArgument("target: point has wrong dimension");
  return value_(x);
}

Matrix TargetMap::jacobian(const Vector& x) const {
  if (x.size() != dim_) throw InvalidArgument("target: point has wrong dimension");
  return jacobian_(x);
}

TargetMap make_target(std::string_view name) {
  if (name == "psi") return TargetMap::builtin_psi();
  if (name == "identity") return TargetMap::identity();
  throw InvalidArgument("unknown target '" + std::string(name) + "'");
}

Vector eval_target(const TargetMap& target, const Vector& x) { return target.eval(x); }

PointSet eval_target(const TargetMap& target, const PointSet& points) {
  PointSet out(points.rows(), points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) out.col(j) = target.eval(points.col(j));
  return out;
}

Dataset make_grid_dataset(const TargetMap& target, double side, int per_axis) {
  if (per_axis < 2) throw InvalidArgument("grid dataset: per_axis must be >= 2");
  if (!(side > 0.0)) throw InvalidArgument("grid dataset: side must be positive");
  if (target.dim() != 2) throw InvalidArgument("grid dataset: target must be planar");
  const Vector axis = Vector::LinSpaced(per_axis, -0.5 * side, 0.5 * side);
  PointSet sources(2, per_axis * per_axis);
  for (int a = 0; a < per_axis; ++a) {
    for (int b = 0; b < per_axis; ++b) {
      sources(0, a * per_axis + b) = axis[a];
      sources(1, a * per_axis + b) = axis[b];
    }
  }
  PointSet targets = eval_target(target, sources);
  return Dataset(std::move(sources), std::move(targets));
}

Dataset make_random_testset(const TargetMap& target, double side, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("random testset: count must be >= 1");
  if (!(side > 0.0)) throw InvalidArgument("random testset: side must be positive");
  if (target.dim() != 2) throw InvalidArgument("random testset: target must be planar");
  CounterRng rng(seed);
  PointSet sources(2, static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < sources.cols(); ++j) {
    sources(0, j) = rng.uniform(-0.5 * side, 0.5 * side);
    sources(1, j) = rng.uniform(-0.5 * side, 0.5 * side);
  }
  PointSet targets = eval_target(target, sources);
  return Dataset(std::move(sources), std::move(targets));
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const int n = data.dim();
  for (int r = 0; r < n; ++r) out << (r ? ",x" : "x") << (r + 1);
  for (int r = 0; r < n; ++r) out << ",y" << (r + 1);
  out << '\n';
  for (Eigen::Index j = 0; j < data.sources().cols(); ++j) {
    for (int r = 0; r < n; ++r) out << (r ? "," : "") << format_number17(data.sources()(r, j));
    for (int r = 0; r < n; ++r) out << ',' << format_number17(data.targets()(r, j));
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.size() % 2 != 0) throw InvalidArgument("dataset csv: bad header");
  const std::size_t n = header.size() / 2;
  for (std::size_t r = 0; r < n; ++r) {
    if (header[r] != "x" + std::to_string(r + 1) || header[n + r] != "y" + std::to_string(r + 1)) {
      throw InvalidArgument("dataset csv: expected header x1..xn,y1..yn");
    }
  }
  std::vector<double> cells;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto row = split_csv_line(line);
    if (row.size() != 2 * n) throw InvalidArgument("dataset csv: row " + std::to_string(rows + 1) + " has wrong width");
    for (const auto& c : row) cells.push_back(parse_number(c));
    ++rows;
  }
  if (rows == 0) throw InvalidArgument("dataset csv: no samples");
  PointSet sources(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows));
  PointSet targets(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows));
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t r = 0; r < n; ++r) {
      sources(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cells[j * 2 * n + r];
      targets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cells[j * 2 * n + n + r];
    }
  }
  return Dataset(std::move(sources), std::move(targets));
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset_csv(data, out);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_dataset_csv(in);
}

}  // namespace resflow
