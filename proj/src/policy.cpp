#include "arena/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "arena/util.hpp"

namespace arena {

namespace {

constexpr std::uint64_t kInitStreamTag = 0x1217a11ced;

void check_context(const PolicySpec& spec, const Context& ctx) {
  if (static_cast<int>(ctx.scene.size()) != spec.scene_dim) {
    throw std::invalid_argument("context scene dimension mismatch");
  }
  if (!ctx.bag.empty() && static_cast<int>(ctx.bag.size()) != spec.vocab_size) {
    throw std::invalid_argument("context bag dimension mismatch");
  }
  if (ctx.z < -1 || ctx.z > 1) throw std::invalid_argument("context z flag out of range");
}

void check_token(const PolicySpec& spec, int token) {
  if (token < 0 || token >= spec.vocab_size) {
    throw std::out_of_range("token id outside policy vocabulary: " + std::to_string(token));
  }
}

}  // namespace

std::vector<double> context_vector(const PolicySpec& spec, const Context& ctx, int prev_token) {
  check_context(spec, ctx);
  if (prev_token < -1 || prev_token >= spec.vocab_size) {
    throw std::out_of_range("previous token outside policy vocabulary");
  }
  std::vector<double> x(static_cast<std::size_t>(spec.context_dim()), 0.0);
  std::copy(ctx.scene.begin(), ctx.scene.end(), x.begin());
  const int prev_slot = prev_token < 0 ? spec.vocab_size : prev_token;  // last slot = start
  x[static_cast<std::size_t>(spec.prev_offset() + prev_slot)] = 1.0;
  if (ctx.z >= 0) x[static_cast<std::size_t>(spec.z_offset() + ctx.z)] = 1.0;
  if (!ctx.bag.empty()) {
    std::copy(ctx.bag.begin(), ctx.bag.end(), x.begin() + spec.bag_offset());
  }
  x[static_cast<std::size_t>(spec.bias_index())] = 1.0;
  return x;
}

std::vector<double> step_probabilities(const PolicyParams& params, const std::vector<double>& x) {
  const int v = params.spec.vocab_size;
  const int c = params.spec.context_dim();
  std::vector<double> logits(static_cast<std::size_t>(v), 0.0);
  for (int t = 0; t < v; ++t) {
    const double* row = params.w.data() + static_cast<std::size_t>(t) * c;
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
    logits[static_cast<std::size_t>(t)] = acc;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    norm += l;
  }
  for (double& l : logits) l /= norm;
  return logits;
}

PolicyParams init_policy(const PolicySpec& spec, Role role, const Vocabulary& vocab,
                         std::uint64_t seed, double init_scale, double grammar_bias) {
  if (spec.vocab_size != vocab.size()) {
    throw std::invalid_argument("policy vocabulary size disagrees with the token table");
  }
  PolicyParams params;
  params.spec = spec;
  params.role = role;
  params.w.assign(static_cast<std::size_t>(spec.vocab_size) * spec.context_dim(), 0.0);

  // One shared draw: the stream does not depend on role, so challenger and
  // solver start numerically equal.
  RngStream rng(mix_seed(seed, kInitStreamTag));
  for (double& wi : params.w) wi = rng.next_symmetric(init_scale);

  if (grammar_bias != 0.0) {
    const double b = grammar_bias;
    const int start = spec.prev_offset() + spec.vocab_size;
    auto edge = [&](int to, int from_slot, double bias) {
      params.w[static_cast<std::size_t>(to) * spec.context_dim() + from_slot] += bias;
    };
    edge(Vocabulary::clm, start, b);
    edge(Vocabulary::yes, start, 0.6 * b);
    edge(Vocabulary::no, start, 0.6 * b);
    for (int o = 0; o < vocab.n_objects; ++o) {
      edge(vocab.object_token(o), spec.prev_offset() + Vocabulary::clm, b);
      for (int a = 0; a < vocab.n_attributes; ++a) {
        edge(vocab.attribute_token(a), spec.prev_offset() + vocab.object_token(o), b);
      }
    }
    for (int a = 0; a < vocab.n_attributes; ++a) {
      for (int v = 0; v < vocab.n_values; ++v) {
        edge(vocab.value_token(v), spec.prev_offset() + vocab.attribute_token(a), b);
      }
    }
    for (int v = 0; v < vocab.n_values; ++v) {
      edge(Vocabulary::eclm, spec.prev_offset() + vocab.value_token(v), b);
    }
    edge(Vocabulary::eos, spec.prev_offset() + Vocabulary::eclm, b);
    edge(Vocabulary::eos, spec.prev_offset() + Vocabulary::yes, 1.5 * b);
    edge(Vocabulary::eos, spec.prev_offset() + Vocabulary::no, 1.5 * b);
  }
  return params;
}

Rollout sample(const PolicyParams& params, const Context& ctx, RngStream& rng, int max_len) {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  check_context(params.spec, ctx);

  Rollout out;
  out.context = ctx;
  int prev = -1;
  double logprob_sum = 0.0;
  for (int t = 0; t < max_len; ++t) {
    const std::vector<double> x = context_vector(params.spec, ctx, prev);
    const std::vector<double> probs = step_probabilities(params, x);
    const double u = rng.next_double();
    double cdf = 0.0;
    int tok = params.spec.vocab_size - 1;
    for (int v = 0; v < params.spec.vocab_size; ++v) {
      cdf += probs[static_cast<std::size_t>(v)];
      if (u < cdf) {
        tok = v;
        break;
      }
    }
    const double lp = std::log(probs[static_cast<std::size_t>(tok)]);
    out.tokens.push_back(tok);
    out.step_logprobs.push_back(lp);
    logprob_sum += lp;
    if (tok == Vocabulary::eos) break;
    prev = tok;
  }
  out.mean_logprob = logprob_sum / static_cast<double>(out.tokens.size());
  return out;
}

double mean_log_likelihood(const PolicyParams& params, const Context& ctx,
                           const std::vector<int>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  check_context(params.spec, ctx);
  int prev = -1;
  double sum = 0.0;
  for (int tok : tokens) {
    check_token(params.spec, tok);
    const std::vector<double> x = context_vector(params.spec, ctx, prev);
    const std::vector<double> probs = step_probabilities(params, x);
    sum += std::log(probs[static_cast<std::size_t>(tok)]);
    prev = tok;
  }
  return sum / static_cast<double>(tokens.size());
}

Gradient zero_gradient(const PolicySpec& spec) {
  return Gradient(static_cast<std::size_t>(spec.vocab_size) * spec.context_dim(), 0.0);
}

void accumulate_score_gradient(const PolicyParams& params, const Context& ctx,
                               const std::vector<int>& tokens, double advantage, Gradient& grad) {
  if (tokens.empty()) throw std::invalid_argument("cannot score an empty sequence");
  if (grad.size() != params.w.size()) throw std::invalid_argument("gradient shape mismatch");
  check_context(params.spec, ctx);
  if (advantage == 0.0) return;

  const int v = params.spec.vocab_size;
  const int c = params.spec.context_dim();
  int prev = -1;
  for (int tok : tokens) {
    check_token(params.spec, tok);
    const std::vector<double> x = context_vector(params.spec, ctx, prev);
    const std::vector<double> probs = step_probabilities(params, x);
    for (int t = 0; t < v; ++t) {
      const double coeff =
          advantage * ((t == tok ? 1.0 : 0.0) - probs[static_cast<std::size_t>(t)]);
      double* row = grad.data() + static_cast<std::size_t>(t) * c;
      for (int j = 0; j < c; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        if (xj != 0.0) row[j] += coeff * xj;
      }
    }
    prev = tok;
  }
}

Gradient score_gradient(const PolicyParams& params, const Context& ctx,
                        const std::vector<int>& tokens, double advantage) {
  Gradient grad = zero_gradient(params.spec);
  accumulate_score_gradient(params, ctx, tokens, advantage, grad);
  return grad;
}

void apply_update(PolicyParams& params, const Gradient& grad, double lr, double clip) {
  if (grad.size() != params.w.size()) throw std::invalid_argument("gradient shape mismatch");
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  if (!std::isfinite(sq)) throw NumericalError("non-finite gradient in apply_update");
  double scale = lr;
  if (clip > 0.0) {
    const double norm = std::sqrt(sq);
    if (norm > clip) scale = lr * clip / norm;
  }
  for (std::size_t i = 0; i < params.w.size(); ++i) params.w[i] += scale * grad[i];
  for (double wi : params.w) {
    if (!std::isfinite(wi)) throw NumericalError("non-finite parameters after update");
  }
}

void save_params(const std::filesystem::path& path, const PolicyParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "arena-tensor 1\n";
  out << "role " << (params.role == Role::challenger ? "challenger" : "solver") << "\n";
  out << "vocab " << params.spec.vocab_size << "\n";
  out << "scene " << params.spec.scene_dim << "\n";
  out << "rows " << params.spec.vocab_size << "\n";
  out << "cols " << params.spec.context_dim() << "\n";
  const int c = params.spec.context_dim();
  for (int t = 0; t < params.spec.vocab_size; ++t) {
    for (int j = 0; j < c; ++j) {
      if (j) out << ' ';
      out << format_double(params.at(t, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "arena-tensor" || version != 1) {
    throw std::runtime_error("not an arena-tensor file: " + path.string());
  }
  std::string key, role;
  int vocab = 0, scene = 0, rows = 0, cols = 0;
  in >> key >> role;
  if (key != "role" || (role != "challenger" && role != "solver")) {
    throw std::runtime_error("bad role header in " + path.string());
  }
  in >> key >> vocab;
  if (key != "vocab") throw std::runtime_error("bad vocab header in " + path.string());
  in >> key >> scene;
  if (key != "scene") throw std::runtime_error("bad scene header in " + path.string());
  in >> key >> rows;
  if (key != "rows") throw std::runtime_error("bad rows header in " + path.string());
  in >> key >> cols;
  if (key != "cols") throw std::runtime_error("bad cols header in " + path.string());

  PolicyParams params;
  params.spec = PolicySpec{vocab, scene};
  params.role = role == "challenger" ? Role::challenger : Role::solver;
  if (rows != params.spec.vocab_size || cols != params.spec.context_dim()) {
    throw std::runtime_error("tensor shape disagrees with header in " + path.string());
  }
  params.w.resize(static_cast<std::size_t>(rows) * cols);
  for (double& wi : params.w) {
    if (!(in >> wi)) throw std::runtime_error("truncated tensor in " + path.string());
  }
  return params;
}

}  // namespace arena
