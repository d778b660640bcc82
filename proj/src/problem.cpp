#include "ddsdp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace ddsdp {

Vec svec(const Mat& x) {
  const Eigen::Index n = x.rows();
  Vec v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    v(k++) = x(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = std::sqrt(2.0) * x(i, j);
  }
  return v;
}

Mat smat(const Vec& v, Eigen::Index n) {
  if (v.size() != n * (n + 1) / 2) throw DimensionMismatch("smat: wrong vector length");
  Mat x(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, i) = v(k++);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      x(i, j) = v(k++) / std::sqrt(2.0);
      x(j, i) = x(i, j);
    }
  }
  return x;
}

namespace {

// Line-oriented token reader. SDPA allows "{ } ( ) ," as separators and
// arbitrary trailing text after the counts on the first two lines.
class SdpaReader {
 public:
  explicit SdpaReader(std::istream& in) : in_(in) {}

  std::size_t line_number() const { return line_no_; }

  // Loads the next non-empty line into the token buffer; false at EOF.
  bool next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      for (char& c : line)
        if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',') c = ' ';
      std::istringstream probe(line);
      std::string first;
      if (!(probe >> first)) continue;
      tokens_.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens_.push_back(tok);
      pos_ = 0;
      return true;
    }
    return false;
  }

  bool skip_comments() {
    while (next_line()) {
      if (tokens_.front()[0] != '"' && tokens_.front()[0] != '*') return true;
    }
    return false;
  }

  bool has_token() const { return pos_ < tokens_.size(); }
  void drop_rest() { pos_ = tokens_.size(); }
  std::size_t remaining() const { return tokens_.size() - pos_; }

  double next_number(const char* what) {
    while (!has_token()) {
      if (!next_line()) throw SyntaxError(line_no_, std::string("unexpected end of input reading ") + what);
    }
    const std::string& tok = tokens_[pos_++];
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw SyntaxError(line_no_, "expected a number for " + std::string(what) + ", got '" + tok + "'");
    }
    if (used != tok.size() && !(tok[used] == '=' || std::isalpha(static_cast<unsigned char>(tok[used]))))
      throw SyntaxError(line_no_, "malformed number '" + tok + "'");
    return v;
  }

  long next_integer(const char* what) {
    const double v = next_number(what);
    if (v != std::floor(v)) throw SyntaxError(line_no_, std::string(what) + " must be an integer");
    return static_cast<long>(v);
  }

 private:
  std::istream& in_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

RawSdp parse_sdpa(std::istream& in) {
  SdpaReader reader(in);
  if (!reader.skip_comments()) throw SyntaxError(reader.line_number(), "empty input");

  const long mdim = reader.next_integer("mDIM");
  reader.drop_rest();
  if (mdim < 0) throw InconsistentDimensions("mDIM must be non-negative");
  const long nblock = reader.next_integer("nBLOCK");
  reader.drop_rest();
  if (nblock < 1) throw InconsistentDimensions("nBLOCK must be positive");

  RawSdp raw;
  std::vector<Eigen::Index> offsets;
  Eigen::Index n = 0;
  for (long b = 0; b < nblock; ++b) {
    const long size = reader.next_integer("block size");
    if (size == 0) throw InconsistentDimensions("block sizes must be non-zero");
    raw.block_structure.push_back(static_cast<int>(size));
    offsets.push_back(n);
    n += std::abs(size);
  }
  reader.drop_rest();

  raw.n = n;
  raw.m = mdim;
  raw.rhs.resize(mdim);
  for (long i = 0; i < mdim; ++i) raw.rhs(i) = reader.next_number("b vector");
  reader.drop_rest();

  std::vector<Mat> mats(static_cast<std::size_t>(mdim + 1), Mat::Zero(n, n));
  while (reader.next_line()) {
    if (reader.remaining() < 5) throw SyntaxError(reader.line_number(), "entry line needs 5 fields");
    const long matno = reader.next_integer("matrix number");
    const long blkno = reader.next_integer("block number");
    const long i = reader.next_integer("row index");
    const long j = reader.next_integer("column index");
    const double value = reader.next_number("entry value");
    reader.drop_rest();
    if (matno < 0 || matno > mdim) throw InconsistentDimensions("matrix number " + std::to_string(matno) + " out of range");
    if (blkno < 1 || blkno > nblock) throw InconsistentDimensions("block number " + std::to_string(blkno) + " out of range");
    const int size = raw.block_structure[static_cast<std::size_t>(blkno - 1)];
    const long extent = std::abs(size);
    if (i < 1 || j < 1 || i > extent || j > extent)
      throw IndexOutOfBlock("entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside block " +
                            std::to_string(blkno) + " (line " + std::to_string(reader.line_number()) + ")");
    if (size < 0 && i != j)
      throw IndexOutOfBlock("off-diagonal entry in diagonal block " + std::to_string(blkno) + " (line " +
                            std::to_string(reader.line_number()) + ")");
    const Eigen::Index r = offsets[static_cast<std::size_t>(blkno - 1)] + i - 1;
    const Eigen::Index c = offsets[static_cast<std::size_t>(blkno - 1)] + j - 1;
    if (!std::isfinite(value)) throw SyntaxError(reader.line_number(), "non-finite entry");
    mats[static_cast<std::size_t>(matno)](r, c) = value;
    mats[static_cast<std::size_t>(matno)](c, r) = value;
  }

  raw.cost = -mats[0];
  raw.constraints.assign(mats.begin() + 1, mats.end());
  return raw;
}

RawSdp parse_sdpa_text(const std::string& text) {
  std::istringstream in(text);
  return parse_sdpa(in);
}

RawSdp load_sdpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  RawSdp raw = parse_sdpa(in);
  const auto slash = path.find_last_of('/');
  raw.name = slash == std::string::npos ? path : path.substr(slash + 1);
  return raw;
}

void write_sdpa(const RawSdp& raw, std::ostream& out) {
  std::vector<int> blocks = raw.block_structure;
  if (blocks.empty()) blocks.push_back(static_cast<int>(raw.n));
  out << "\"" << (raw.name.empty() ? "ddsdp instance" : raw.name) << "\n";
  out << raw.m << " = mDIM\n" << blocks.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < blocks.size(); ++b) out << (b ? " " : "") << blocks[b];
  out << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < raw.m; ++i) out << (i ? " " : "") << raw.rhs(i);
  out << "\n";
  auto emit = [&](long matno, const Mat& mat) {
    Eigen::Index offset = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Eigen::Index extent = std::abs(blocks[b]);
      for (Eigen::Index i = 0; i < extent; ++i) {
        for (Eigen::Index j = i; j < extent; ++j) {
          if (blocks[b] < 0 && i != j) continue;
          const double v = mat(offset + i, offset + j);
          if (v != 0.0) out << matno << " " << b + 1 << " " << i + 1 << " " << j + 1 << " " << v << "\n";
        }
      }
      offset += extent;
    }
  };
  emit(0, -raw.cost);
  for (Eigen::Index i = 0; i < raw.m; ++i) emit(i + 1, raw.constraints[static_cast<std::size_t>(i)]);
}

NormalizedSdp normalize(const RawSdp& raw) {
  const Eigen::Index n = raw.n;
  const Eigen::Index m = raw.m;
  const Eigen::Index dim = n * (n + 1) / 2;
  Mat q(dim, m);
  Mat r = Mat::Zero(m, m);
  double largest = 0.0;
  // Modified Gram–Schmidt with one reorthogonalization pass.
  for (Eigen::Index j = 0; j < m; ++j) {
    Vec v = svec(raw.constraints[static_cast<std::size_t>(j)]);
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = q.col(i).dot(v);
        r(i, j) += c;
        v -= c * q.col(i);
      }
    }
    const double pivot = v.norm();
    largest = std::max(largest, std::max(pivot, j == 0 ? original : 0.0));
    if (!(pivot > kRankTolerance * largest)) throw RankDeficientConstraints(j);
    r(j, j) = pivot;
    q.col(j) = v / pivot;
  }

  NormalizedSdp out;
  out.n = n;
  out.m = m;
  out.name = raw.name;
  out.transform = r;
  out.constraints.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) out.constraints.push_back(smat(q.col(i), n));
  // b = Rᵀ b_n.
  out.rhs = m > 0 ? Vec(r.transpose().triangularView<Eigen::Lower>().solve(raw.rhs)) : Vec(0);

  Vec c = svec(raw.cost);
  double offset = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double coef = q.col(i).dot(c);
      offset += coef * out.rhs(i);
      c -= coef * q.col(i);
    }
  }
  const double scale = c.norm();
  out.cost_offset = offset;
  if (scale <= 1e-12 * std::max(1.0, raw.cost.norm())) {
    out.cost_scale = 0.0;
    out.cost = Mat::Zero(n, n);
  } else {
    out.cost_scale = scale;
    out.cost = smat(c / scale, n);
  }
  return out;
}

RawSdp random_sdp(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  if (n < 1) throw DimensionMismatch("random_sdp: order must be positive");
  if (m < 1 || m > n * (n + 1) / 2 - 1)
    throw TooManyConstraints("random_sdp: need 1 <= M <= N(N+1)/2 - 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) a(i, j) = a(j, i) = normal(rng);
    return a;
  };
  RawSdp raw;
  raw.n = n;
  raw.m = m;
  raw.block_structure = {static_cast<int>(n)};
  raw.name = "random-" + std::to_string(n) + "-" + std::to_string(m) + "-" + std::to_string(seed);
  raw.cost = draw();
  raw.constraints.push_back(Mat::Identity(n, n));
  for (Eigen::Index i = 1; i < m; ++i) raw.constraints.push_back(draw());
  raw.rhs.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) raw.rhs(i) = raw.constraints[static_cast<std::size_t>(i)].trace();
  return raw;
}

double recover_objective(const NormalizedSdp& norm, const Mat& x) {
  return norm.cost_scale * frob_inner(norm.cost, x) + norm.cost_offset;
}

double constraint_residual(const NormalizedSdp& norm, const Mat& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < norm.m; ++i)
    worst = std::max(worst, std::abs(frob_inner(norm.constraints[static_cast<std::size_t>(i)], x) - norm.rhs(i)));
  return worst;
}

double constraint_residual(const RawSdp& raw, const Mat& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < raw.m; ++i)
    worst = std::max(worst, std::abs(frob_inner(raw.constraints[static_cast<std::size_t>(i)], x) - raw.rhs(i)));
  return worst;
}

}  // namespace ddsdp
