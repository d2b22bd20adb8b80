#include "lrfk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lrfk/text.hpp"

namespace lrfk {

EdgeId EdgeIndex::id(VertexId a, VertexId b) const {
  if (a == b) throw std::invalid_argument("edge endpoints must differ");
  if (a >= n_ || b >= n_) throw std::out_of_range("edge endpoint outside the vertex set");
  if (a > b) std::swap(a, b);
  return static_cast<EdgeId>(b) * (b - 1) / 2 + a;
}

std::pair<VertexId, VertexId> EdgeIndex::pair(EdgeId e) const {
  if (e >= count()) throw std::out_of_range("edge id out of range");
  // b is the largest integer with b(b-1)/2 <= e.
  auto b = static_cast<EdgeId>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(e))) / 2.0);
  while (b * (b - 1) / 2 > e) --b;
  while ((b + 1) * b / 2 <= e) ++b;
  return {static_cast<VertexId>(e - b * (b - 1) / 2), static_cast<VertexId>(b)};
}

Box::Box(int dimension, Norm norm, std::vector<Ball> balls)
    : dimension_(dimension), norm_(norm), balls_(std::move(balls)) {
  std::vector<LatticeVector> pts;
  for (const auto& ball : balls_) {
    const auto half = static_cast<std::int64_t>(std::ceil(ball.radius));
    LatticeVector y(dimension_);
    for (int i = 0; i < dimension_; ++i) y[i] = ball.center[i] - half;
    LatticeVector diff(dimension_);
    while (true) {
      for (int i = 0; i < dimension_; ++i) diff[i] = y[i] - ball.center[i];
      if (norm_of(diff, norm_) < ball.radius) pts.push_back(y);
      int i = dimension_;
      while (i-- > 0) {
        if (y[i] < ball.center[i] + half) {
          ++y[i];
          break;
        }
        y[i] = ball.center[i] - half;
      }
      if (i < 0) break;
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() > std::numeric_limits<VertexId>::max())
    throw std::length_error("box has too many vertices");
  vertex_count_ = pts.size();
  coords_.reserve(pts.size() * dimension_);
  for (const auto& p : pts) coords_.insert(coords_.end(), p.begin(), p.end());
  edges_ = EdgeIndex(vertex_count_);
}

Box Box::make(int dimension, const LatticeVector& center, double radius, Norm norm) {
  if (dimension < 1) throw std::invalid_argument("box dimension must be >= 1");
  if (static_cast<int>(center.size()) != dimension)
    throw std::invalid_argument("box center has wrong dimension");
  if (!(radius >= 1.0)) throw std::invalid_argument("box radius must be >= 1");
  return Box(dimension, norm, {Ball{center, radius}});
}

Box Box::unite(const Box& a, const Box& b) {
  if (a.dimension_ != b.dimension_ || a.norm_ != b.norm_)
    throw std::invalid_argument("cannot unite boxes of different dimension or norm");
  auto balls = a.balls_;
  balls.insert(balls.end(), b.balls_.begin(), b.balls_.end());
  return Box(a.dimension_, a.norm_, std::move(balls));
}

std::span<const std::int64_t> Box::vertex(VertexId i) const {
  if (i >= vertex_count_) throw std::out_of_range("vertex index out of range");
  return {coords_.data() + static_cast<std::size_t>(i) * dimension_,
          static_cast<std::size_t>(dimension_)};
}

LatticeVector Box::vertex_vector(VertexId i) const {
  auto v = vertex(i);
  return {v.begin(), v.end()};
}

std::optional<VertexId> Box::find(std::span<const std::int64_t> x) const {
  if (static_cast<int>(x.size()) != dimension_) return std::nullopt;
  std::size_t lo = 0, hi = vertex_count_;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto* p = coords_.data() + mid * dimension_;
    if (std::lexicographical_compare(p, p + dimension_, x.begin(), x.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < vertex_count_ && std::equal(x.begin(), x.end(), coords_.data() + lo * dimension_))
    return static_cast<VertexId>(lo);
  return std::nullopt;
}

VertexId Box::index(std::span<const std::int64_t> x) const {
  auto i = find(x);
  if (!i) throw std::out_of_range("vertex " + format_lattice_vector(x) + " is not in the box");
  return *i;
}

double Box::distance(VertexId i, VertexId j) const {
  const auto* a = coords_.data() + static_cast<std::size_t>(i) * dimension_;
  const auto* b = coords_.data() + static_cast<std::size_t>(j) * dimension_;
  if (dimension_ == 1) return static_cast<double>(a[0] > b[0] ? a[0] - b[0] : b[0] - a[0]);
  std::int64_t buf[16];
  std::vector<std::int64_t> big;
  std::int64_t* d = buf;
  if (dimension_ > 16) {
    big.resize(dimension_);
    d = big.data();
  }
  for (int k = 0; k < dimension_; ++k) d[k] = b[k] - a[k];
  return norm_of({d, static_cast<std::size_t>(dimension_)}, norm_);
}

double Box::distance_to(VertexId i, std::span<const std::int64_t> x) const {
  auto v = vertex(i);
  LatticeVector d(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) d[k] = x[k] - v[k];
  return norm_of(d, norm_);
}

void Box::difference(VertexId i, VertexId j, std::span<std::int64_t> out) const {
  const auto* a = coords_.data() + static_cast<std::size_t>(i) * dimension_;
  const auto* b = coords_.data() + static_cast<std::size_t>(j) * dimension_;
  for (int k = 0; k < dimension_; ++k) out[k] = b[k] - a[k];
}

EdgeId Box::pair_index(std::span<const std::int64_t> x, std::span<const std::int64_t> y) const {
  return edges_.id(index(x), index(y));
}

std::pair<LatticeVector, LatticeVector> Box::pair_of(EdgeId e) const {
  auto [a, b] = edges_.pair(e);
  return {vertex_vector(a), vertex_vector(b)};
}

std::string Box::descriptor() const {
  std::ostringstream os;
  os << "d=" << dimension_ << ";norm=" << to_string(norm_) << ";balls=";
  for (std::size_t i = 0; i < balls_.size(); ++i)
    os << (i ? "|" : "") << format_lattice_vector(balls_[i].center) << '@'
       << format_double(balls_[i].radius);
  return os.str();
}

Box Box::from_descriptor(const std::string& text) {
  int d = 0;
  std::optional<Norm> norm;
  std::vector<Ball> balls;
  for (auto field : split(text, ';')) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("bad box descriptor: " + text);
    auto key = field.substr(0, eq);
    auto value = field.substr(eq + 1);
    if (key == "d") {
      d = static_cast<int>(parse_int(value));
    } else if (key == "norm") {
      norm = parse_norm(value);
    } else if (key == "balls") {
      for (auto b : split(value, '|')) {
        auto at = b.find('@');
        if (at == std::string_view::npos) throw std::invalid_argument("bad ball: " + std::string(b));
        balls.push_back({parse_lattice_vector(b.substr(0, at)), parse_double(b.substr(at + 1))});
      }
    } else {
      throw std::invalid_argument("unknown box descriptor key: " + std::string(key));
    }
  }
  if (!norm || balls.empty()) throw std::invalid_argument("incomplete box descriptor: " + text);
  Box box = make(d, balls.front().center, balls.front().radius, *norm);
  for (std::size_t i = 1; i < balls.size(); ++i)
    box = unite(box, make(d, balls[i].center, balls[i].radius, *norm));
  return box;
}

double Box::radius() const {
  double r = 0.0;
  for (const auto& b : balls_) r = std::max(r, b.radius);
  return r;
}

}  // namespace lrfk
