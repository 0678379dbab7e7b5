// Independent reference implementations used to check the production code.
// Everything here is deliberately naive: brute force beats clever when the
// job is to catch bugs in the clever version.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// ---- SHA-256, straight from the FIPS 180-4 pseudocode. ----------------------

inline std::string sha256_hex(const std::string& data) {
  auto rotr = [](std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); };
  static const std::uint32_t K[64] = {
      0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
      0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
      0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
      0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
      0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
      0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
      0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
      0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
      0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
      0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
      0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

  std::vector<std::uint8_t> msg(data.begin(), data.end());
  std::uint64_t bitlen = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(0x80);
  while (msg.size() % 64 != 56) msg.push_back(0x00);
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>(bitlen >> (8 * i)));

  for (size_t off = 0; off < msg.size(); off += 64) {
    std::uint32_t w[64];
    for (int t = 0; t < 16; ++t)
      w[t] = (std::uint32_t(msg[off + 4 * t]) << 24) |
             (std::uint32_t(msg[off + 4 * t + 1]) << 16) |
             (std::uint32_t(msg[off + 4 * t + 2]) << 8) | std::uint32_t(msg[off + 4 * t + 3]);
    for (int t = 16; t < 64; ++t) {
      std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int t = 0; t < 64; ++t) {
      std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = hh + S1 + ch + K[t] + w[t];
      std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = S0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (std::uint32_t v : h)
    for (int i = 7; i >= 0; --i) out.push_back(hex[(v >> (4 * i)) & 0xf]);
  return out;
}

// ---- Brute-force convex hull: O(n^3) edge test. -----------------------------
// For random (general-position) points: (i,j) is a CCW hull edge iff every
// other point lies strictly to the left of the directed line i->j.

struct Pt {
  double x, y;
  bool operator<(const Pt& o) const { return x < o.x || (x == o.x && y < o.y); }
  bool operator==(const Pt& o) const { return x == o.x && y == o.y; }
};

inline std::set<Pt> brute_hull_vertices(const std::vector<Pt>& pts) {
  std::set<Pt> verts;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = true;
      for (size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        double cr = (pts[j].x - pts[i].x) * (pts[k].y - pts[i].y) -
                    (pts[j].y - pts[i].y) * (pts[k].x - pts[i].x);
        if (cr <= 0) {  // on or right of the edge: not a CCW hull edge
          edge = false;
          break;
        }
      }
      if (edge) {
        verts.insert(pts[i]);
        verts.insert(pts[j]);
      }
    }
  return verts;
}

// ---- Exhaustive assignment: max cardinality, then min total cost. -----------
// Rows pick a column or stay unmatched; infinity marks inadmissible pairs.

struct AssignBest {
  int matched = -1;
  double cost = 0.0;
  std::vector<int> assignment;
};

inline void assign_rec(const std::vector<double>& c, int rows, int cols, int row,
                       std::vector<int>& cur, std::vector<char>& used, int matched,
                       double cost, AssignBest& best) {
  if (row == rows) {
    if (matched > best.matched || (matched == best.matched && cost < best.cost)) {
      best.matched = matched;
      best.cost = cost;
      best.assignment = cur;
    }
    return;
  }
  for (int j = 0; j < cols; ++j) {
    double v = c[static_cast<size_t>(row) * cols + j];
    if (used[j] || std::isinf(v)) continue;
    used[j] = 1;
    cur[row] = j;
    assign_rec(c, rows, cols, row + 1, cur, used, matched + 1, cost + v, best);
    used[j] = 0;
  }
  cur[row] = -1;
  assign_rec(c, rows, cols, row + 1, cur, used, matched, cost, best);
}

inline AssignBest brute_assignment(const std::vector<double>& cost, int rows, int cols) {
  AssignBest best;
  std::vector<int> cur(rows, -1);
  std::vector<char> used(cols, 0);
  assign_rec(cost, rows, cols, 0, cur, used, 0, 0.0, best);
  return best;
}

// ---- Sort-and-index statistics. ---------------------------------------------

inline double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

inline double p95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t idx = static_cast<size_t>(std::ceil(0.95 * v.size())) - 1;
  return v[idx];
}

}  // namespace oracle
