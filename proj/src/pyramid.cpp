#include "roman/pyramid.hpp"

#include <string>

#include "roman/errors.hpp"

namespace roman {

namespace {

double edge_left(std::span<const double> row, Boundary boundary) noexcept {
  switch (boundary) {
    case Boundary::reflect: return row.size() > 1 ? row[1] : row[0];
    case Boundary::replicate: return row[0];
    case Boundary::zero: return 0.0;
  }
  return 0.0;
}

double edge_right(std::span<const double> row, Boundary boundary) noexcept {
  const std::size_t n = row.size();
  switch (boundary) {
    case Boundary::reflect: return n > 1 ? row[n - 2] : row[0];
    case Boundary::replicate: return row[n - 1];
    case Boundary::zero: return 0.0;
  }
  return 0.0;
}

}  // namespace

Series smooth(const Series& x, Boundary boundary) {
  Series y(x.channels(), x.length());
  const std::size_t n = x.length();
  if (n == 0) return y;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto in = x.channel(c);
    auto out = y.channel(c);
    if (n == 1) {
      out[0] = boundary == Boundary::zero ? 0.5 * in[0] : in[0];
      continue;
    }
    out[0] = 0.25 * edge_left(in, boundary) + 0.5 * in[0] + 0.25 * in[1];
    for (std::size_t t = 1; t + 1 < n; ++t) {
      out[t] = 0.25 * in[t - 1] + 0.5 * in[t] + 0.25 * in[t + 1];
    }
    out[n - 1] = 0.25 * in[n - 2] + 0.5 * in[n - 1] + 0.25 * edge_right(in, boundary);
  }
  return y;
}

Series decimate(const Series& x) {
  const std::size_t n = decimated_length(x.length());
  Series y(x.channels(), n);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto in = x.channel(c);
    auto out = y.channel(c);
    for (std::size_t t = 0; t < n; ++t) out[t] = in[2 * t];
  }
  return y;
}

std::vector<std::size_t> level_lengths(std::size_t length, int scales) {
  if (scales < 1) {
    throw Error(ErrorKind::depth_too_large,
                "pyramid depth must be at least 1, got " + std::to_string(scales));
  }
  if (length == 0) {
    throw Error(ErrorKind::depth_too_large, "cannot build a pyramid over an empty series");
  }
  std::vector<std::size_t> lengths{length};
  for (int s = 1; s < scales; ++s) {
    const std::size_t next = decimated_length(lengths.back());
    if (next == 0) {
      throw Error(ErrorKind::depth_too_large,
                  "level " + std::to_string(s + 1) + " would be empty");
    }
    lengths.push_back(next);
  }
  return lengths;
}

std::vector<std::size_t> Pyramid::lengths() const {
  std::vector<std::size_t> out;
  out.reserve(levels.size());
  for (const auto& level : levels) out.push_back(level.length());
  return out;
}

Pyramid build_pyramid(const Series& x, int scales) {
  (void)level_lengths(x.length(), scales);
  Pyramid pyramid;
  pyramid.levels.reserve(static_cast<std::size_t>(scales));
  pyramid.levels.push_back(x);
  for (int s = 1; s < scales; ++s) {
    pyramid.levels.push_back(decimate(smooth(pyramid.levels.back())));
  }
  return pyramid;
}

}  // namespace roman
