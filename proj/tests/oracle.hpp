#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library: integer algebra where the library uses two-pass
// floating point, explicit index arithmetic instead of Frame helpers.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

namespace oracle {

using Image = std::vector<std::vector<int>>;  // [row][col]

inline Image to_image(int width, int height, const std::vector<std::uint8_t>& px) {
  Image img(height, std::vector<int>(width));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) img[r][c] = px[r * width + c];
  return img;
}

inline int get(const Image& img, int r, int c) {
  const int h = static_cast<int>(img.size());
  const int w = static_cast<int>(img[0].size());
  if (r < 0) r = 0;
  if (r >= h) r = h - 1;
  if (c < 0) c = 0;
  if (c >= w) c = w - 1;
  return img[r][c];
}

// MAD = sum|n*x - S| / n^2, exact in integers before the final division.
inline double mad(const std::vector<int>& x) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::int64_t s = 0;
  for (int v : x) s += v;
  std::int64_t acc = 0;
  for (int v : x) acc += std::llabs(n * v - s);
  return static_cast<double>(acc) / static_cast<double>(n * n);
}

// Var = (n*sum x^2 - S^2) / n^2.
inline double variance(const std::vector<int>& x) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::int64_t s = 0;
  std::int64_t s2 = 0;
  for (int v : x) {
    s += v;
    s2 += static_cast<std::int64_t>(v) * v;
  }
  return static_cast<double>(n * s2 - s * s) / static_cast<double>(n * n);
}

inline int median9(const Image& img, int r, int c) {
  std::vector<int> w;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) w.push_back(get(img, r + dr, c + dc));
  std::sort(w.begin(), w.end());
  return w[4];
}

inline Image median3(const Image& img) {
  Image out = img;
  for (std::size_t r = 0; r < img.size(); ++r)
    for (std::size_t c = 0; c < img[0].size(); ++c)
      out[r][c] = median9(img, static_cast<int>(r), static_cast<int>(c));
  return out;
}

// Sobel via explicit kernel tables.
inline void sobel_at(const Image& img, int r, int c, long& gx, long& gy) {
  static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  gx = 0;
  gy = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int v = get(img, r + i - 1, c + j - 1);
      gx += kx[i][j] * v;
      gy += ky[i][j] * v;
    }
}

inline int edge_count(const Image& img, int r0, int c0, int n, int g_th) {
  int count = 0;
  for (int r = r0; r < r0 + n; ++r)
    for (int c = c0; c < c0 + n; ++c) {
      long gx = 0;
      long gy = 0;
      sobel_at(img, r, c, gx, gy);
      if (std::labs(gx) + std::labs(gy) >= g_th) ++count;
    }
  return count;
}

inline long double harris(const Image& img, int r, int c, long double k) {
  const int h = static_cast<int>(img.size());
  const int w = static_cast<int>(img[0].size());
  long double a = 0, b = 0, d = 0;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      const int rr = std::clamp(r + dr, 0, h - 1);
      const int cc = std::clamp(c + dc, 0, w - 1);
      long gx = 0;
      long gy = 0;
      sobel_at(img, rr, cc, gx, gy);
      a += static_cast<long double>(gx) * gx;
      b += static_cast<long double>(gy) * gy;
      d += static_cast<long double>(gx) * gy;
    }
  return (a * b - d * d) - k * (a + b) * (a + b);
}

inline int corner_count(const Image& img, int r0, int c0, int n, long double k,
                        long double th) {
  int count = 0;
  for (int r = r0; r < r0 + n; ++r)
    for (int c = c0; c < c0 + n; ++c)
      if (harris(img, r, c, k) >= th) ++count;
  return count;
}

inline int mismatch(const std::vector<int>& a, const std::vector<int>& b, int delta) {
  int count = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) >= delta) ++count;
  return count;
}

inline std::vector<int> block(const Image& img, int r0, int c0, int n) {
  std::vector<int> out;
  for (int r = r0; r < r0 + n; ++r)
    for (int c = c0; c < c0 + n; ++c) out.push_back(img[r][c]);
  return out;
}

}  // namespace oracle
