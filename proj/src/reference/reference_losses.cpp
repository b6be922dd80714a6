#include "mvts/reference_losses.hpp"

#include <algorithm>
#include <cmath>

namespace mvts::reference {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

double cosine(const std::vector<double>& a, const std::vector<double>& b, double tau) {
  return dot(a, b) / (tau * (norm(a) + 1e-12) * (norm(b) + 1e-12));
}

double nt_xent_pair(const Matrix& zw, const Matrix& zv, double tau) {
  const std::size_t n = zw.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(cosine(zw[i], zv[j], tau));
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) denom += std::exp(cosine(zw[i], zw[j], tau));
    total += std::log(std::exp(cosine(zw[i], zv[i], tau)) / denom);
  }
  return -total / double(n);
}

double nt_xent(const std::vector<Matrix>& views, double tau) {
  const std::size_t v_count = views.size();
  double total = 0.0;
  for (std::size_t v = 0; v < v_count; ++v)
    for (std::size_t w = 0; w < v_count; ++w)
      if (w != v) total += nt_xent_pair(views[w], views[v], tau);
  return total / double(v_count * (v_count - 1));
}

double ts2vec_dual(const Sequence& zw, const Sequence& zv) {
  const std::size_t n = zw.size(), t = zw[0].size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < t; ++s) {
      const double pos = std::exp(dot(zw[i][s], zv[i][s]));
      if (t > 1) {
        double denom = 0.0;
        for (std::size_t u = 0; u < t; ++u) denom += std::exp(dot(zw[i][s], zv[i][u]));
        for (std::size_t u = 0; u < t; ++u)
          if (u != s) denom += std::exp(dot(zw[i][s], zw[i][u]));
        total += std::log(pos / denom);
      }
      if (n > 1) {
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) denom += std::exp(dot(zw[i][s], zv[j][s]));
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) denom += std::exp(dot(zw[i][s], zw[j][s]));
        total += std::log(pos / denom);
      }
    }
  return -total / double(2 * n * t);
}

Sequence maxpool_time(const Sequence& z) {
  const std::size_t t = z[0].size();
  const std::size_t out_t = t < 2 ? 1 : (t - 2) / 2 + 1;
  Sequence out(z.size(), std::vector<std::vector<double>>(out_t));
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t o = 0; o < out_t; ++o) {
      out[i][o] = z[i][2 * o];
      if (2 * o + 1 < t)
        for (std::size_t l = 0; l < out[i][o].size(); ++l) out[i][o][l] = std::max(out[i][o][l], z[i][2 * o + 1][l]);
    }
  return out;
}

double ts2vec_hierarchical(const Sequence& zw, const Sequence& zv) {
  double total = 0.0;
  std::size_t levels = 0;
  Sequence w = zw, v = zv;
  while (true) {
    total += ts2vec_dual(w, v);
    ++levels;
    if (w[0].size() == 1) break;
    w = maxpool_time(w);
    v = maxpool_time(v);
  }
  return total / double(levels);
}

double ts2vec(const std::vector<Sequence>& views, bool hierarchical) {
  const std::size_t v_count = views.size();
  double total = 0.0;
  for (std::size_t v = 0; v < v_count; ++v)
    for (std::size_t w = 0; w < v_count; ++w)
      if (w != v) total += hierarchical ? ts2vec_hierarchical(views[w], views[v]) : ts2vec_dual(views[w], views[v]);
  return total / double(v_count * (v_count - 1));
}

double cocoa(const std::vector<Matrix>& views, double tau, double lambda) {
  const std::size_t v_count = views.size(), n = views[0].size();
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < v_count; ++v)
      for (std::size_t w = 0; w < v_count; ++w)
        if (w != v) cross += std::exp(1.0 / tau - cosine(views[w][i], views[v][i], tau));
  double disc = 0.0;
  for (std::size_t v = 0; v < v_count; ++v) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) d += std::exp(cosine(views[v][i], views[v][j], tau));
    disc += d / double(n);
  }
  return cross + lambda * disc;
}

Sequence to_sequence(const std::vector<double>& data, std::size_t n, std::size_t l, std::size_t t) {
  Sequence out(n, std::vector<std::vector<double>>(t, std::vector<double>(l)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < l; ++f)
      for (std::size_t s = 0; s < t; ++s) out[i][s][f] = data[(i * l + f) * t + s];
  return out;
}

Matrix to_matrix(const std::vector<double>& data, std::size_t n, std::size_t d) {
  Matrix out(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) out[i][k] = data[i * d + k];
  return out;
}

}  // namespace mvts::reference
