#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace asca {

// Dense row-major matrix, just enough linear algebra for the adapter math.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

// Frozen base layer: bit-identical before and after any adapter training.
struct FrozenLinear {
  Matrix weight;              // d_out x d_in
  std::vector<double> bias;   // d_out

  std::vector<double> forward(const std::vector<double>& x) const;
};

// Low-rank update pair: delta W = A * B with rank <= c.
struct LoraAdapter {
  Matrix a;  // d_out x c
  Matrix b;  // c x d_in
  std::size_t rank = 0;

  void validate(const FrozenLinear& base) const;
};

// A initialized to zeros, B to small Gaussians, so the initial delta is
// exactly zero.
LoraAdapter init_adapter(std::size_t d_out, std::size_t d_in, std::size_t rank,
                         std::uint64_t seed);

// W0 + A*B; base unmodified.
Matrix merge(const FrozenLinear& base, const LoraAdapter& ad);

// (W0 + AB) x + bias without materializing AB: W0 x + A (B x) + bias.
std::vector<double> lora_forward(const FrozenLinear& base, const LoraAdapter& ad,
                                 const std::vector<double>& x);

struct TrainExample {
  std::vector<double> x;
  int label;
};

struct CurriculumStage {
  std::string noise_level;  // Low | Medium | High
  std::vector<TrainExample> examples;
  int epochs = 1;
};

struct TrainOptions {
  double learning_rate = 0.0002;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
};

struct TrainResult {
  LoraAdapter adapter;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> stage_losses;  // mean loss after each stage
};

// Softmax cross-entropy through A and B only (AdamW, decoupled weight decay);
// stages run in order with their own example sets. Throws DivergenceError if
// the loss becomes non-finite.
TrainResult train_lora(const FrozenLinear& base, std::size_t rank,
                       const std::vector<CurriculumStage>& curriculum,
                       const TrainOptions& opts = TrainOptions{});

// Mean softmax cross-entropy of the adapted layer over a batch.
double lora_loss(const FrozenLinear& base, const LoraAdapter& ad,
                 const std::vector<TrainExample>& batch);

// Analytic gradients of lora_loss w.r.t. every entry of A and B; exposed for
// finite-difference verification.
void lora_gradients(const FrozenLinear& base, const LoraAdapter& ad,
                    const std::vector<TrainExample>& batch, Matrix& grad_a,
                    Matrix& grad_b);

// Adapter persistence: binary A and B plus JSON metadata.
void save_adapter(const LoraAdapter& ad, const std::filesystem::path& dir);
LoraAdapter load_adapter(const std::filesystem::path& dir);

}  // namespace asca
