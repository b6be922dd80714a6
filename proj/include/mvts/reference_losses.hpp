#pragma once

#include <cstddef>
#include <vector>

// Direct-summation versions of the contrastive losses, written from the
// formulas with plain loops and no numerical stabilization. They share no
// code with the Tensor implementations and exist to cross-check them.
namespace mvts::reference {

// [N][D]
using Matrix = std::vector<std::vector<double>>;
// [N][T][L]
using Sequence = std::vector<std::vector<std::vector<double>>>;

double cosine(const std::vector<double>& a, const std::vector<double>& b, double tau);

double nt_xent_pair(const Matrix& zw, const Matrix& zv, double tau);
double nt_xent(const std::vector<Matrix>& views, double tau);

double ts2vec_dual(const Sequence& zw, const Sequence& zv);
Sequence maxpool_time(const Sequence& z);
double ts2vec_hierarchical(const Sequence& zw, const Sequence& zv);
double ts2vec(const std::vector<Sequence>& views, bool hierarchical = true);

double cocoa(const std::vector<Matrix>& views, double tau, double lambda);

// Row-major [N, L, T] buffer to [N][T][L] and [N][L*T].
Sequence to_sequence(const std::vector<double>& data, std::size_t n, std::size_t l, std::size_t t);
Matrix to_matrix(const std::vector<double>& data, std::size_t n, std::size_t d);

}  // namespace mvts::reference
