#include "asca/lora.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "asca/errors.hpp"
#include "asca/rng.hpp"
#include "asca/spectrogram.hpp"

namespace asca {

using nlohmann::json;

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return out;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  if (m.cols != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += m.at(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> FrozenLinear::forward(const std::vector<double>& x) const {
  auto out = matvec(weight, x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i];
  return out;
}

void LoraAdapter::validate(const FrozenLinear& base) const {
  if (a.rows != base.weight.rows || b.cols != base.weight.cols || a.cols != rank ||
      b.rows != rank) {
    throw std::invalid_argument("lora adapter: shape mismatch with base");
  }
  if (rank == 0 || rank >= std::min(base.weight.rows, base.weight.cols)) {
    throw std::invalid_argument("lora adapter: rank must satisfy 0 < c < min(d_out, d_in)");
  }
  for (double x : a.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("lora adapter: non-finite A");
  }
  for (double x : b.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("lora adapter: non-finite B");
  }
}

LoraAdapter init_adapter(std::size_t d_out, std::size_t d_in, std::size_t rank,
                         std::uint64_t seed) {
  if (rank == 0 || rank >= std::min(d_out, d_in)) {
    throw std::invalid_argument("init_adapter: rank must satisfy 0 < c < min(d_out, d_in)");
  }
  LoraAdapter ad;
  ad.rank = rank;
  ad.a = Matrix(d_out, rank);  // zeros: initial delta W is exactly zero
  ad.b = Matrix(rank, d_in);
  Rng rng(seed);
  for (double& x : ad.b.v) x = 0.01 * rng.gaussian();
  return ad;
}

Matrix merge(const FrozenLinear& base, const LoraAdapter& ad) {
  ad.validate(base);
  Matrix w = matmul(ad.a, ad.b);
  for (std::size_t i = 0; i < w.v.size(); ++i) w.v[i] += base.weight.v[i];
  return w;
}

std::vector<double> lora_forward(const FrozenLinear& base, const LoraAdapter& ad,
                                 const std::vector<double>& x) {
  ad.validate(base);
  auto out = base.forward(x);
  const auto bx = matvec(ad.b, x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ad.rank; ++k) acc += ad.a.at(i, k) * bx[k];
    out[i] += acc;
  }
  return out;
}

namespace {

// Softmax probabilities and cross-entropy of one example; dlogits is filled
// with (softmax - onehot) for the backward pass.
double example_loss(const std::vector<double>& logits, int label,
                    std::vector<double>& dlogits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - zmax);
  dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    dlogits[i] = std::exp(logits[i] - zmax) / denom;
  }
  const double loss = -(logits[static_cast<std::size_t>(label)] - zmax - std::log(denom));
  dlogits[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

}  // namespace

double lora_loss(const FrozenLinear& base, const LoraAdapter& ad,
                 const std::vector<TrainExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("lora_loss: empty batch");
  double total = 0.0;
  std::vector<double> dlogits;
  for (const auto& ex : batch) {
    total += example_loss(lora_forward(base, ad, ex.x), ex.label, dlogits);
  }
  return total / static_cast<double>(batch.size());
}

void lora_gradients(const FrozenLinear& base, const LoraAdapter& ad,
                    const std::vector<TrainExample>& batch, Matrix& grad_a,
                    Matrix& grad_b) {
  if (batch.empty()) throw std::invalid_argument("lora_gradients: empty batch");
  grad_a = Matrix(ad.a.rows, ad.a.cols);
  grad_b = Matrix(ad.b.rows, ad.b.cols);
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dlogits;
  for (const auto& ex : batch) {
    const auto bx = matvec(ad.b, ex.x);
    example_loss(lora_forward(base, ad, ex.x), ex.label, dlogits);
    // dL/dA = dlogits (Bx)^T ; dL/dB = A^T dlogits x^T
    for (std::size_t i = 0; i < ad.a.rows; ++i) {
      for (std::size_t k = 0; k < ad.rank; ++k) {
        grad_a.at(i, k) += scale * dlogits[i] * bx[k];
      }
    }
    std::vector<double> at_d(ad.rank, 0.0);
    for (std::size_t k = 0; k < ad.rank; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ad.a.rows; ++i) acc += ad.a.at(i, k) * dlogits[i];
      at_d[k] = acc;
    }
    for (std::size_t k = 0; k < ad.rank; ++k) {
      for (std::size_t j = 0; j < ad.b.cols; ++j) {
        grad_b.at(k, j) += scale * at_d[k] * ex.x[j];
      }
    }
  }
}

TrainResult train_lora(const FrozenLinear& base, std::size_t rank,
                       const std::vector<CurriculumStage>& curriculum,
                       const TrainOptions& opts) {
  if (curriculum.empty()) throw std::invalid_argument("train_lora: empty curriculum");
  for (const auto& stage : curriculum) {
    if (stage.examples.empty() || stage.epochs <= 0) {
      throw std::invalid_argument("train_lora: stage needs examples and epochs >= 1");
    }
  }

  TrainResult result;
  result.adapter = init_adapter(base.weight.rows, base.weight.cols, rank, opts.seed);
  auto& ad = result.adapter;
  result.initial_loss = lora_loss(base, ad, curriculum.front().examples);

  // AdamW state for A and B.
  Matrix ma(ad.a.rows, ad.a.cols), va(ad.a.rows, ad.a.cols);
  Matrix mb(ad.b.rows, ad.b.cols), vb(ad.b.rows, ad.b.cols);
  long step = 0;

  const auto adamw_update = [&](Matrix& param, const Matrix& grad, Matrix& m, Matrix& v) {
    const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.v.size(); ++i) {
      m.v[i] = opts.beta1 * m.v[i] + (1.0 - opts.beta1) * grad.v[i];
      v.v[i] = opts.beta2 * v.v[i] + (1.0 - opts.beta2) * grad.v[i] * grad.v[i];
      const double mhat = m.v[i] / bc1;
      const double vhat = v.v[i] / bc2;
      param.v[i] -= opts.learning_rate *
                    (mhat / (std::sqrt(vhat) + opts.eps) + opts.weight_decay * param.v[i]);
    }
  };

  Matrix grad_a, grad_b;
  for (const auto& stage : curriculum) {
    for (int epoch = 0; epoch < stage.epochs; ++epoch) {
      std::vector<std::size_t> order(stage.examples.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(Rng::derive(opts.seed, static_cast<std::uint64_t>(step) + 1));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(
                      0, static_cast<std::int64_t>(i) - 1))]);
      }
      for (std::size_t idx : order) {
        const std::vector<TrainExample> one{stage.examples[idx]};
        lora_gradients(base, ad, one, grad_a, grad_b);
        ++step;
        adamw_update(ad.a, grad_a, ma, va);
        adamw_update(ad.b, grad_b, mb, vb);
        for (double x : ad.a.v) {
          if (!std::isfinite(x)) throw DivergenceError("train_lora: adapter A became non-finite");
        }
        for (double x : ad.b.v) {
          if (!std::isfinite(x)) throw DivergenceError("train_lora: adapter B became non-finite");
        }
      }
      const double loss = lora_loss(base, ad, stage.examples);
      if (!std::isfinite(loss)) throw DivergenceError("train_lora: loss became non-finite");
    }
    result.stage_losses.push_back(lora_loss(base, ad, stage.examples));
  }
  result.final_loss = lora_loss(base, ad, curriculum.back().examples);
  return result;
}

void save_adapter(const LoraAdapter& ad, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "lora_a.mat", ad.a.rows, ad.a.cols, ad.a.v);
  write_matrix(dir / "lora_b.mat", ad.b.rows, ad.b.cols, ad.b.v);
  json meta;
  meta["rank"] = ad.rank;
  std::ofstream f(dir / "adapter.json");
  f << meta.dump(2) << "\n";
}

LoraAdapter load_adapter(const std::filesystem::path& dir) {
  std::ifstream f(dir / "adapter.json");
  if (!f) throw std::runtime_error("load_adapter: cannot open " + (dir / "adapter.json").string());
  const json meta = json::parse(f);
  LoraAdapter ad;
  ad.rank = meta.at("rank").get<std::size_t>();
  std::size_t r = 0, c = 0;
  ad.a.v = read_matrix(dir / "lora_a.mat", r, c);
  ad.a.rows = r;
  ad.a.cols = c;
  ad.b.v = read_matrix(dir / "lora_b.mat", r, c);
  ad.b.rows = r;
  ad.b.cols = c;
  return ad;
}

}  // namespace asca
