#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

struct ApResult {
  bool converged = false;
  std::vector<int> exemplars;
  std::vector<int> labels;  // index of the assigned exemplar
};

// Affinity propagation written directly from the message definitions,
// recomputing every max and sum from scratch (O(N^3) per sweep).
//   r(i,k) <- s(i,k) - max_{k' != k} [a(i,k') + s(i,k')]
//   a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))   i != k
//   a(k,k) <- sum_{i' != k} max(0, r(i',k))
// Each new message is blended as lambda * old + (1 - lambda) * new. `s`
// already carries the preference on its diagonal.
inline ApResult reference_ap(const Matrix& s, double lambda, int max_iter, int stable_iter) {
  const int n = static_cast<int>(s.size());
  Matrix r(n, std::vector<double>(n, 0.0));
  Matrix a(n, std::vector<double>(n, 0.0));
  std::vector<bool> prev;
  int unchanged = 0;
  ApResult out;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        double m = -std::numeric_limits<double>::infinity();
        for (int kk = 0; kk < n; ++kk) {
          if (kk != k) m = std::max(m, a[i][kk] + s[i][kk]);
        }
        r[i][k] = lambda * r[i][k] + (1.0 - lambda) * (s[i][k] - m);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int ii = 0; ii < n; ++ii) {
          if (ii != i && ii != k) sum += std::max(0.0, r[ii][k]);
        }
        const double fresh = i == k ? sum : std::min(0.0, r[k][k] + sum);
        a[i][k] = lambda * a[i][k] + (1.0 - lambda) * fresh;
      }
    }
    std::vector<bool> ex(n);
    int count = 0;
    for (int k = 0; k < n; ++k) {
      ex[k] = a[k][k] + r[k][k] > 0.0;
      count += ex[k] ? 1 : 0;
    }
    unchanged = (ex == prev) ? unchanged + 1 : 1;
    prev = ex;
    if (unchanged >= stable_iter && count > 0) {
      out.converged = true;
      break;
    }
  }
  for (int k = 0; k < n; ++k) {
    if (prev[k]) out.exemplars.push_back(k);
  }
  out.labels.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (std::find(out.exemplars.begin(), out.exemplars.end(), i) != out.exemplars.end()) {
      out.labels[i] = i;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int k : out.exemplars) {
      if (s[i][k] > best) {
        best = s[i][k];
        out.labels[i] = k;
      }
    }
  }
  return out;
}

}  // namespace oracle
