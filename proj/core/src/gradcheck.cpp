#include "restyle/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "restyle/classifier.hpp"
#include "restyle/rewards.hpp"
#include "restyle/rng.hpp"
#include "restyle/seq2seq.hpp"
#include "restyle/vocab.hpp"

namespace restyle {

namespace {

constexpr double kOpTol = 1e-4;
constexpr double kLossTol = 1e-3;
constexpr double kStep = 1e-3;

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(data));
}

std::vector<int> random_ids(int n, int hi, Rng& rng) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (auto& id : ids) id = rng.uniform_int(hi);
  return ids;
}

// scalarizes an op output with fixed random weights so every output element
// influences the checked value
Tensor weigh(const Tensor& y, Rng& rng) {
  Tensor w = random_tensor(y.shape(), rng);
  return sum(mul(y, w));
}

void merge(GradSuiteCheck& check, const GradCheckReport& report) {
  ++check.instances;
  check.elements += report.checked;
  check.failures += report.failures.size();
  check.max_rel_err = std::max(check.max_rel_err, report.max_rel_err);
}

using OpCase = std::function<GradCheckReport(Rng&)>;

GradCheckReport run_case(const std::function<Tensor(const Tensor&)>& f,
                         const Tensor& x, double tol) {
  return grad_check(f, x, kStep, tol);
}

std::vector<std::pair<std::string, OpCase>> op_cases() {
  std::vector<std::pair<std::string, OpCase>> cases;

  cases.emplace_back("matmul_lhs", [](Rng& rng) {
    Tensor b = random_tensor({4, 2}, rng);
    Tensor x = random_tensor({3, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(matmul(t, b), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("matmul_rhs", [](Rng& rng) {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor x = random_tensor({4, 2}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(matmul(a, t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("add", [](Rng& rng) {
    Tensor b = random_tensor({3, 5}, rng);
    Tensor x = random_tensor({3, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(add(t, b), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("mul", [](Rng& rng) {
    Tensor b = random_tensor({3, 5}, rng);
    Tensor x = random_tensor({3, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(mul(t, b), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("neg", [](Rng& rng) {
    Tensor x = random_tensor({2, 6}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(neg(t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("sigmoid", [](Rng& rng) {
    Tensor x = random_tensor({2, 6}, rng, -2.0, 2.0);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(sigmoid(t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("tanh", [](Rng& rng) {
    Tensor x = random_tensor({2, 6}, rng, -2.0, 2.0);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(tanh(t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("log", [](Rng& rng) {
    Tensor x = random_tensor({2, 6}, rng, 0.3, 3.0);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(log(t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("affine", [](Rng& rng) {
    Tensor x = random_tensor({2, 6}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(affine(t, -1.7, 0.4), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("clamp", [](Rng& rng) {
    // inputs kept away from the clamp bounds: the kink is not differentiable
    Tensor x = random_tensor({2, 6}, rng, -0.8, 0.8);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(clamp(t, -0.9, 0.9), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("add_bias", [](Rng& rng) {
    Tensor b = random_tensor({1, 5}, rng);
    Tensor x = random_tensor({3, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(add_bias(t, b), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("add_bias_b", [](Rng& rng) {
    Tensor a = random_tensor({3, 5}, rng);
    Tensor x = random_tensor({1, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(add_bias(a, t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("scale_rows", [](Rng& rng) {
    Tensor s = random_tensor({3, 1}, rng);
    Tensor x = random_tensor({3, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(scale_rows(t, s), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("scale_rows_s", [](Rng& rng) {
    Tensor a = random_tensor({3, 5}, rng);
    Tensor x = random_tensor({3, 1}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(scale_rows(a, t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("softmax", [](Rng& rng) {
    Tensor x = random_tensor({3, 6}, rng, -2.0, 2.0);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(softmax(t, 1), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("softmax_log", [](Rng& rng) {
    Tensor x = random_tensor({2, 5}, rng, -2.0, 2.0);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(log(softmax(t, 1)), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("concat_cols", [](Rng& rng) {
    Tensor b = random_tensor({3, 2}, rng);
    Tensor x = random_tensor({3, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(concat_cols({t, b, t}), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("concat_rows", [](Rng& rng) {
    Tensor b = random_tensor({2, 4}, rng);
    Tensor x = random_tensor({3, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(concat_rows({t, b}), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("slice_cols", [](Rng& rng) {
    Tensor x = random_tensor({3, 6}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(slice_cols(t, 1, 4), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("slice_rows", [](Rng& rng) {
    Tensor x = random_tensor({5, 3}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(slice_rows(t, 1, 4), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("sum", [](Rng& rng) {
    Tensor x = random_tensor({3, 4}, rng);
    return run_case([](const Tensor& t) { return sum(t); }, x, kOpTol);
  });
  cases.emplace_back("mean", [](Rng& rng) {
    Tensor x = random_tensor({3, 4}, rng);
    return run_case([](const Tensor& t) { return mean(t); }, x, kOpTol);
  });
  cases.emplace_back("max_over_rows", [](Rng& rng) {
    Tensor x = random_tensor({6, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(max_over_rows(t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("embed", [](Rng& rng) {
    std::vector<int> ids = random_ids(5, 7, rng);
    Tensor x = random_tensor({7, 3}, rng);
    return run_case(
        [&, ids](const Tensor& t) {
          Rng wr(7);
          return weigh(embed(t, ids), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("gather_cols", [](Rng& rng) {
    std::vector<int> ids = random_ids(4, 6, rng);
    Tensor x = random_tensor({4, 6}, rng);
    return run_case(
        [&, ids](const Tensor& t) {
          Rng wr(7);
          return weigh(gather_cols(t, ids), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("scatter_rows", [](Rng& rng) {
    std::vector<std::vector<int>> ids;
    for (int r = 0; r < 3; ++r) ids.push_back(random_ids(4, 9, rng));
    Tensor x = random_tensor({3, 4}, rng);
    return run_case(
        [&, ids](const Tensor& t) {
          Rng wr(7);
          return weigh(scatter_rows(t, ids, 9), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("stack_timesteps", [](Rng& rng) {
    Tensor b = random_tensor({3, 4}, rng);
    Tensor x = random_tensor({3, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(stack_timesteps({t, b, t}), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("bmm_qk_q", [](Rng& rng) {
    Tensor enc = random_tensor({2, 5, 4}, rng);
    Tensor x = random_tensor({2, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(bmm_qk(t, enc), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("bmm_qk_enc", [](Rng& rng) {
    Tensor q = random_tensor({2, 4}, rng);
    Tensor x = random_tensor({2, 5, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(bmm_qk(q, t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("bmm_av_w", [](Rng& rng) {
    Tensor enc = random_tensor({2, 5, 4}, rng);
    Tensor x = random_tensor({2, 5}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(bmm_av(t, enc), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("bmm_av_enc", [](Rng& rng) {
    Tensor w = random_tensor({2, 5}, rng);
    Tensor x = random_tensor({2, 5, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(bmm_av(w, t), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("conv1d_x", [](Rng& rng) {
    Tensor k = random_tensor({3, 3, 4}, rng);
    Tensor b = random_tensor({1, 3}, rng);
    Tensor x = random_tensor({7, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(conv1d(t, k, b), wr);
        },
        x, kOpTol);
  });
  cases.emplace_back("conv1d_k", [](Rng& rng) {
    Tensor a = random_tensor({7, 4}, rng);
    Tensor b = random_tensor({1, 3}, rng);
    Tensor x = random_tensor({3, 3, 4}, rng);
    return run_case(
        [&](const Tensor& t) {
          Rng wr(7);
          return weigh(conv1d(a, t, b), wr);
        },
        x, kOpTol);
  });
  return cases;
}

// ---- loss-level checks through a small random model ----

struct TinySetup {
  Seq2SeqConfig model_cfg;
  ClassifierConfig clf_cfg;
  Batch batch;
};

TinySetup tiny_setup(Rng& rng) {
  TinySetup s;
  s.model_cfg = {.vocab = 12, .emb = 4, .hidden = 5, .max_decode_len = 6};
  s.clf_cfg = {.vocab = 12, .emb = 4, .filters = 3, .widths = {2, 3}};
  const int b = 2;
  for (int r = 0; r < b; ++r) {
    int slen = 2 + rng.uniform_int(3);  // content + <eos>
    int tlen = 2 + rng.uniform_int(3);
    std::vector<int> src, tgt;
    for (int i = 0; i < slen - 1; ++i) src.push_back(4 + rng.uniform_int(8));
    src.push_back(kEosId);
    for (int i = 0; i < tlen - 1; ++i) tgt.push_back(4 + rng.uniform_int(8));
    tgt.push_back(kEosId);
    s.batch.src.push_back(std::move(src));
    s.batch.src_len.push_back(slen);
    s.batch.tgt.push_back(std::move(tgt));
    s.batch.tgt_len.push_back(tlen);
  }
  int max_s = 0, max_t = 0;
  for (auto& r : s.batch.src) max_s = std::max(max_s, (int)r.size());
  for (auto& r : s.batch.tgt) max_t = std::max(max_t, (int)r.size());
  for (auto& r : s.batch.src) r.resize((std::size_t)max_s, kPadId);
  for (auto& r : s.batch.tgt) r.resize((std::size_t)max_t, kPadId);
  return s;
}

// checks d(loss)/d(param) for every model parameter
template <typename LossFn>
void check_loss_params(GradSuiteCheck& check, Seq2SeqModel& model,
                       LossFn&& loss_fn) {
  for (auto& p : model.parameters()) {
    Tensor original = p.tensor;
    Tensor* slot = nullptr;
    // map the named handle back onto the model field
    for (Tensor* t : {&model.src_emb, &model.tgt_emb, &model.enc_w,
                      &model.enc_b, &model.dec_w, &model.dec_b, &model.attn_w,
                      &model.out_w, &model.out_b, &model.gate_w,
                      &model.gate_b}) {
      if (t->node() == original.node()) {
        slot = t;
        break;
      }
    }
    auto f = [&](const Tensor& probe) {
      *slot = probe;
      Tensor loss = loss_fn();
      *slot = original;
      return loss;
    };
    merge(check, grad_check(f, original, kStep, kLossTol));
  }
}

void loss_checks(GradSuiteResult& result, std::uint64_t seed, int instances) {
  GradSuiteCheck ml{"loss_ml", 0, 0, 0, 0.0};
  GradSuiteCheck cp{"loss_cp", 0, 0, 0, 0.0};
  GradSuiteCheck ts{"loss_ts", 0, 0, 0, 0.0};
  GradSuiteCheck soft{"score_soft_wrt_probs", 0, 0, 0, 0.0};

  Rng rng(split_seed(seed, "gradcheck-losses"));
  for (int inst = 0; inst < instances; ++inst) {
    TinySetup s = tiny_setup(rng);
    Seq2SeqModel model(s.model_cfg, rng.next_u64());
    StyleClassifier clf(s.clf_cfg, rng.next_u64());

    check_loss_params(ml, model,
                      [&] { return loss_ml(model, s.batch); });

    // rewards and decodes pinned before differentiating
    CpDecodes decodes = decode_for_cp(model, s.batch, rng.next_u64());
    // equal rewards make the loss identically zero; nudge one entry so the
    // gradient path stays informative
    if (decodes.reward_greedy == decodes.reward_sampled)
      decodes.reward_greedy[0] += 0.25;
    check_loss_params(
        cp, model, [&] { return loss_cp_pinned(model, s.batch, decodes); });

    auto paths = greedy_paths(model, s.batch);
    Direction dir = inst % 2 == 0 ? Direction::LowToHigh
                                  : Direction::HighToLow;
    check_loss_params(ts, model, [&] {
      return loss_ts_pinned(model, clf, s.batch, paths, dir);
    });

    // classifier soft-score gradient w.r.t. the step distributions
    {
      const int t = 4;
      std::vector<double> probs(static_cast<std::size_t>(t) * 12);
      for (auto& v : probs) v = rng.uniform(0.05, 1.0);
      Tensor x = Tensor::from({t, 12}, std::move(probs));
      auto f = [&](const Tensor& p) { return sum(clf.score_soft(p)); };
      merge(soft, grad_check(f, x, kStep, kOpTol));
    }
  }
  result.checks.push_back(ml);
  result.checks.push_back(cp);
  result.checks.push_back(ts);
  result.checks.push_back(soft);
}

}  // namespace

GradSuiteResult run_gradient_suite(std::uint64_t seed, int instances) {
  GradSuiteResult result;
  Rng rng(split_seed(seed, "gradcheck-ops"));
  for (auto& [name, fn] : op_cases()) {
    GradSuiteCheck check{name, 0, 0, 0, 0.0};
    for (int i = 0; i < instances; ++i) merge(check, fn(rng));
    result.checks.push_back(check);
  }
  loss_checks(result, seed, instances);
  return result;
}

std::string format_suite(const GradSuiteResult& result) {
  std::ostringstream os;
  for (const auto& c : result.checks) {
    os << (c.pass() ? "PASS" : "FAIL") << "  " << c.name << "  instances="
       << c.instances << " elements=" << c.elements
       << " max_rel_err=" << c.max_rel_err;
    if (!c.pass()) os << " failures=" << c.failures;
    os << '\n';
  }
  os << (result.pass() ? "gradient suite: PASS" : "gradient suite: FAIL")
     << '\n';
  return os.str();
}

}  // namespace restyle
