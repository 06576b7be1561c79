#include "nytro/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace nytro {

namespace {

namespace fs = std::filesystem;

constexpr char kCacheMagic[8] = {'N', 'Y', 'L', 'D', 'V', '0', '0', '1'};

struct ParsedRow {
  double label = 0.0;
  std::vector<std::pair<Index, double>> features;  // 1-based indices
};

ParsedRow parse_line(const std::string& line, std::size_t line_no) {
  ParsedRow row;
  std::istringstream in(line);
  std::string token;
  if (!(in >> token))
    throw ParseError("libsvm line " + std::to_string(line_no) + ": empty line");
  try {
    std::size_t used = 0;
    row.label = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError("libsvm line " + std::to_string(line_no) +
                     ": non-numeric label '" + token + "'");
  }
  while (in >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos)
      throw ParseError("libsvm line " + std::to_string(line_no) +
                       ": malformed feature '" + token + "'");
    long idx = 0;
    double value = 0.0;
    try {
      std::size_t used = 0;
      idx = std::stol(token.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("trailing");
      const std::string value_str = token.substr(colon + 1);
      value = std::stod(value_str, &used);
      if (used != value_str.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("libsvm line " + std::to_string(line_no) +
                       ": non-numeric feature '" + token + "'");
    }
    if (idx < 1)
      throw ParseError("libsvm line " + std::to_string(line_no) +
                       ": feature index must be >= 1");
    row.features.emplace_back(static_cast<Index>(idx), value);
  }
  return row;
}

bool load_cache(const std::string& cache_path, Dataset& out) {
  std::ifstream in(cache_path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + 8, kCacheMagic))
    return false;
  std::int64_t n = 0;
  std::int64_t d = 0;
  if (!in.read(reinterpret_cast<char*>(&n), sizeof(n)) ||
      !in.read(reinterpret_cast<char*>(&d), sizeof(d)) || n < 0 || d < 0)
    return false;
  out.targets.resize(n);
  out.points.resize(n, d);
  if (!in.read(reinterpret_cast<char*>(out.targets.data()),
               static_cast<std::streamsize>(sizeof(double) * n)))
    return false;
  if (!in.read(reinterpret_cast<char*>(out.points.data()),
               static_cast<std::streamsize>(sizeof(double) * n * d)))
    return false;
  return true;
}

void store_cache(const std::string& cache_path, const Dataset& data) {
  std::ofstream out(cache_path, std::ios::binary | std::ios::trunc);
  if (!out) return;  // cache is best-effort
  const std::int64_t n = data.points.rows();
  const std::int64_t d = data.points.cols();
  out.write(kCacheMagic, sizeof(kCacheMagic));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(data.targets.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
  out.write(reinterpret_cast<const char*>(data.points.data()),
            static_cast<std::streamsize>(sizeof(double) * n * d));
}

}  // namespace

Dataset load_libsvm(const std::string& path, bool use_cache) {
  if (!fs::exists(path)) throw InputError("load_libsvm: no such file: " + path);
  const std::string cache_path = path + ".cache";

  Dataset data;
  data.name = fs::path(path).stem().string();
  if (use_cache && fs::exists(cache_path) &&
      fs::last_write_time(cache_path) >= fs::last_write_time(path)) {
    if (load_cache(cache_path, data)) return data;
  }

  std::ifstream in(path);
  if (!in) throw InputError("load_libsvm: cannot open " + path);

  std::vector<ParsedRow> rows;
  Index max_feature = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    rows.push_back(parse_line(line, line_no));
    for (const auto& [idx, value] : rows.back().features)
      max_feature = std::max(max_feature, idx);
  }
  if (rows.empty()) throw ParseError("load_libsvm: no data rows in " + path);

  const Index n = static_cast<Index>(rows.size());
  data.targets.resize(n);
  data.points = Matrix::Zero(n, max_feature);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    data.targets[i] = row.label;
    for (const auto& [idx, value] : row.features) data.points(i, idx - 1) = value;
  }

  if (use_cache) store_cache(cache_path, data);
  return data;
}

void save_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("save_libsvm: cannot open " + path);
  out.precision(17);
  for (Index i = 0; i < data.points.rows(); ++i) {
    out << data.targets[i];
    for (Index j = 0; j < data.points.cols(); ++j) {
      if (data.points(i, j) != 0.0) out << ' ' << (j + 1) << ':' << data.points(i, j);
    }
    out << '\n';
  }
}

Vector scale_targets_unit(const Vector& y) {
  if (y.size() == 0) throw InputError("scale_targets_unit: empty targets");
  const double lo = y.minCoeff();
  const double hi = y.maxCoeff();
  if (!(hi > lo)) throw InputError("scale_targets_unit: constant targets");
  return (y.array() - lo) / (hi - lo);
}

SyntheticInstance synthesize_fixed_design(const SynthesisConfig& config) {
  if (config.n < 1) throw InputError("synthesize_fixed_design: n must be >= 1");
  if (!(config.target_snr > 0.0))
    throw InputError("synthesize_fixed_design: target_snr must be positive");
  if (!(config.sigma2 > 0.0))
    throw InputError("synthesize_fixed_design: sigma2 must be positive");

  Rng rng(Rng::derive(config.seed, 0x73796e74ULL));
  SyntheticInstance instance;

  if (config.family == SynthesisFamily::abstract_spectrum) {
    if (config.spectrum.size() != config.n)
      throw InputError("synthesize_fixed_design: spectrum size must equal n");
    if (config.spectrum.minCoeff() < 0.0)
      throw InputError("synthesize_fixed_design: spectrum must be nonnegative");
    // Random orthonormal basis: QR of a Gaussian matrix, signs fixed so the
    // result is a deterministic function of the draw.
    const Matrix g = rng.normal_matrix(config.n, config.n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix u = qr.householderQ() * Matrix::Identity(config.n, config.n);
    const Matrix r_diag = qr.matrixQR();
    for (Index j = 0; j < config.n; ++j)
      if (r_diag(j, j) < 0.0) u.col(j) = -u.col(j);
    Vector spectrum = config.spectrum;
    std::sort(spectrum.data(), spectrum.data() + spectrum.size(), std::greater<double>());
    Matrix k = u * spectrum.asDiagonal() * u.transpose();
    instance.points = Matrix(0, 0);
    instance.gram = KernelGram(((k + k.transpose()) * 0.5).eval());
  } else {
    if (config.d < 1) throw InputError("synthesize_fixed_design: geometric family needs d >= 1");
    instance.points = rng.normal_matrix(config.n, config.d);
    instance.gram = gram_full(config.kernel, instance.points);
  }

  const KernelGram& gram = instance.gram;
  const Matrix p = range_projector(gram);

  // In-range coefficient direction, rescaled for the exact requested SNR.
  Vector direction = p * rng.normal_vector(config.n);
  const double energy = direction.dot(gram.matrix() * direction);
  if (!(energy > 0.0))
    throw InputError("synthesize_fixed_design: degenerate spectrum, cannot reach target SNR");
  const double scale = std::sqrt(config.target_snr * config.sigma2 / energy);

  FixedDesignProblem& problem = instance.problem;
  problem.points = instance.points;
  problem.alpha_opt = scale * direction;
  problem.mu = gram.matrix() * problem.alpha_opt;
  problem.sigma2 = config.sigma2;
  problem.noise_seed = Rng::derive(config.seed, 0x6e6f6973ULL);

  if (config.out_of_range_norm > 0.0) {
    Vector out_of_range = rng.normal_vector(config.n);
    out_of_range -= p * out_of_range;
    const double norm = out_of_range.norm();
    if (norm > 1e-14)
      problem.mu += (config.out_of_range_norm / norm) * out_of_range;
  }
  return instance;
}

}  // namespace nytro
