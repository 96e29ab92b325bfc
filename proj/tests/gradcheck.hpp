// SPDX-License-Identifier: Apache-2.0
// Finite-difference gradient checking shared by the autodiff unit tests and
// the acceptance suite. Central differences, double-precision reduction, and
// a relative tolerance scaled by max(1, |analytic|, |fd|).
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lutnn/ops.hpp"
#include "lutnn/tape.hpp"
#include "lutnn/tensor.hpp"

namespace gradcheck {

using lutnn::Matrix;
using lutnn::Parameter;
using lutnn::Rng;
using lutnn::Tape;

// One differentiable argument of the graph under test. Either a plain matrix
// the harness mounts as a leaf, or a Parameter the builder mounts itself
// (batch_norm does this for its gain/shift).
struct Slot {
  Matrix* m = nullptr;
  Parameter* p = nullptr;
  const char* name = "";
};

// Rebuilds the graph over the current slot contents. `leaf_ids` has one entry
// per slot: the leaf node id for matrix slots, -1 for parameter slots.
using Builder = std::function<int(Tape&, const std::vector<int>&)>;

struct Report {
  int checked = 0;
  double max_rel = 0.0;
  int failures = 0;
  std::string worst;
};

inline double weighted_sum(const Matrix& v, const Matrix& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) acc += double(v(i, j)) * double(s(i, j));
  return acc;
}

// Forward pass only: mounts matrix slots as leaves, runs the builder, reduces
// the output against `seed`.
inline double forward_scalar(const Builder& f, const std::vector<Slot>& slots,
                             const Matrix& seed) {
  Tape t;
  std::vector<int> ids;
  ids.reserve(slots.size());
  for (const Slot& s : slots) ids.push_back(s.m ? t.leaf(*s.m) : -1);
  int out = f(t, ids);
  return weighted_sum(t.val(out), seed);
}

// Checks d(sum(seed .* f(slots)))/d(slot entry) for every entry of every slot.
inline Report check(const Builder& f, const std::vector<Slot>& slots, const Matrix& seed,
                    double tol = 1e-3, double h = 1e-3) {
  Report rep;

  Tape t;
  std::vector<int> ids;
  ids.reserve(slots.size());
  for (const Slot& s : slots) {
    ids.push_back(s.m ? t.leaf(*s.m) : -1);
    if (s.p) s.p->zero_grad();
  }
  int out = f(t, ids);
  t.backward_seeded(out, seed);

  for (size_t k = 0; k < slots.size(); ++k) {
    const Slot& s = slots[k];
    Matrix& target = s.m ? *s.m : s.p->value;
    const Matrix& analytic = s.m ? t.grad(ids[k]) : s.p->grad;
    for (Eigen::Index i = 0; i < target.rows(); ++i) {
      for (Eigen::Index j = 0; j < target.cols(); ++j) {
        float keep = target(i, j);
        target(i, j) = keep + float(h);
        double hi = forward_scalar(f, slots, seed);
        target(i, j) = keep - float(h);
        double lo = forward_scalar(f, slots, seed);
        target(i, j) = keep;
        double fd = (hi - lo) / (2.0 * h);
        double a = double(analytic(i, j));
        double rel = std::fabs(a - fd) / std::max({1.0, std::fabs(a), std::fabs(fd)});
        ++rep.checked;
        if (rel > rep.max_rel) {
          rep.max_rel = rel;
          char buf[160];
          std::snprintf(buf, sizeof buf, "%s(%d,%d): analytic=%.6g fd=%.6g rel=%.3g",
                        s.name, int(i), int(j), a, fd, rel);
          rep.worst = buf;
        }
        if (rel > tol) ++rep.failures;
      }
    }
  }
  return rep;
}

inline void merge(Report& into, const Report& r, const char* op) {
  into.checked += r.checked;
  into.failures += r.failures;
  if (r.max_rel > into.max_rel) {
    into.max_rel = r.max_rel;
    into.worst = std::string(op) + " " + r.worst;
  }
}

// Uniform draw with a dead zone around 0 so ReLU kinks sit far from the
// +-h probes.
inline Matrix draw(Rng& rng, int r, int c, float lo = -2.0f, float hi = 2.0f,
                   float keep_out = 0.0f) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      float v = rng.uniform(lo, hi);
      if (keep_out > 0.0f && std::fabs(v) < keep_out) v = v < 0.0f ? -keep_out : keep_out;
      m(i, j) = v;
    }
  return m;
}

// One random case per call. Shapes are kept small so the float forward noise
// stays well under the tolerance.
inline Report case_affine(Rng& rng) {
  int B = 2 + int(rng.below(5)), I = 1 + int(rng.below(5)), O = 1 + int(rng.below(5));
  Matrix x = draw(rng, B, I), w = draw(rng, O, I), b = draw(rng, 1, O);
  Matrix seed = draw(rng, B, O);
  Builder f = [](Tape& t, const std::vector<int>& id) {
    return lutnn::affine(t, id[0], id[1], id[2]);
  };
  return check(f, {{&x, nullptr, "x"}, {&w, nullptr, "w"}, {&b, nullptr, "b"}}, seed);
}

inline Report case_relu(Rng& rng) {
  int B = 2 + int(rng.below(5)), C = 1 + int(rng.below(6));
  Matrix x = draw(rng, B, C, -2.0f, 2.0f, 0.05f);
  Matrix seed = draw(rng, B, C);
  Builder f = [](Tape& t, const std::vector<int>& id) { return lutnn::relu(t, id[0]); };
  return check(f, {{&x, nullptr, "x"}}, seed);
}

inline Report case_add(Rng& rng) {
  int B = 2 + int(rng.below(5)), C = 1 + int(rng.below(6));
  Matrix a = draw(rng, B, C), b = draw(rng, B, C);
  Matrix seed = draw(rng, B, C);
  Builder f = [](Tape& t, const std::vector<int>& id) { return lutnn::add(t, id[0], id[1]); };
  return check(f, {{&a, nullptr, "a"}, {&b, nullptr, "b"}}, seed);
}

inline Report case_batch_norm(Rng& rng) {
  int B = 4 + int(rng.below(5)), C = 1 + int(rng.below(6));
  Matrix x = draw(rng, B, C);
  Matrix seed = draw(rng, B, C);
  lutnn::BatchNormState bn(C);
  bn.gain.value = draw(rng, 1, C, 0.5f, 1.5f);
  bn.shift.value = draw(rng, 1, C, -0.5f, 0.5f);
  Builder f = [&bn](Tape& t, const std::vector<int>& id) {
    return lutnn::batch_norm(t, id[0], bn, /*train=*/true, /*update_running=*/false);
  };
  return check(f,
               {{&x, nullptr, "x"},
                {nullptr, &bn.gain, "gain"},
                {nullptr, &bn.shift, "shift"}},
               seed);
}

inline Report case_cross_entropy(Rng& rng) {
  int B = 2 + int(rng.below(5)), C = 2 + int(rng.below(5));
  Matrix logits = draw(rng, B, C, -3.0f, 3.0f);
  std::vector<int> labels(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) labels[size_t(i)] = int(rng.below(uint64_t(C)));
  Matrix seed = draw(rng, 1, 1, 0.5f, 1.5f);
  Builder f = [labels](Tape& t, const std::vector<int>& id) {
    return lutnn::cross_entropy(t, id[0], labels);
  };
  return check(f, {{&logits, nullptr, "logits"}}, seed);
}

inline Report case_gather_cols(Rng& rng) {
  int B = 2 + int(rng.below(5)), C = 2 + int(rng.below(5));
  int K = 1 + int(rng.below(uint64_t(C + 2)));  // may exceed C: duplicates exercise scatter-add
  Matrix x = draw(rng, B, C);
  std::vector<int> idx(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) idx[size_t(k)] = int(rng.below(uint64_t(C)));
  Matrix seed = draw(rng, B, K);
  Builder f = [idx](Tape& t, const std::vector<int>& id) {
    return lutnn::gather_cols(t, id[0], idx);
  };
  return check(f, {{&x, nullptr, "x"}}, seed);
}

// Deep composite: affine -> batch_norm -> relu -> affine -> cross_entropy,
// with a fan-out add on the hidden activation. Exercises pull-back chaining
// and gradient accumulation across reuse.
inline Report case_composite(Rng& rng) {
  int B = 4 + int(rng.below(4)), I = 2 + int(rng.below(3)), H = 3, C = 3;
  Matrix x = draw(rng, B, I);
  Matrix w1 = draw(rng, H, I), b1 = draw(rng, 1, H);
  Matrix w2 = draw(rng, C, H), b2 = draw(rng, 1, C);
  lutnn::BatchNormState bn(H);
  bn.gain.value = draw(rng, 1, H, 0.5f, 1.5f);
  bn.shift.value = draw(rng, 1, H, 0.6f, 1.2f);  // biased positive: keeps relu off its kink
  std::vector<int> labels(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) labels[size_t(i)] = int(rng.below(uint64_t(C)));
  Matrix seed(1, 1);
  seed(0, 0) = 1.0f;
  Builder f = [&bn, labels](Tape& t, const std::vector<int>& id) {
    int h = lutnn::affine(t, id[0], id[1], id[2]);
    int n = lutnn::batch_norm(t, h, bn, true, false);
    int r = lutnn::relu(t, n);
    int doubled = lutnn::add(t, r, r);
    int logits = lutnn::affine(t, doubled, id[3], id[4]);
    return lutnn::cross_entropy(t, logits, labels);
  };
  return check(f,
               {{&x, nullptr, "x"},
                {&w1, nullptr, "w1"},
                {&b1, nullptr, "b1"},
                {&w2, nullptr, "w2"},
                {&b2, nullptr, "b2"},
                {nullptr, &bn.gain, "gain"},
                {nullptr, &bn.shift, "shift"}},
               seed);
}

struct SuiteResult {
  int cases = 0;
  int checked = 0;
  int failures = 0;
  double max_rel = 0.0;
  std::string worst;
};

// Runs `cases_per_op` random draws of every primitive. Seed fans out per op so
// adding an op never disturbs the others' cases.
inline SuiteResult run_primitive_suite(uint64_t seed, int cases_per_op) {
  struct Op {
    const char* name;
    Report (*fn)(Rng&);
  };
  const Op ops[] = {
      {"affine", case_affine},       {"relu", case_relu},
      {"add", case_add},             {"batch_norm", case_batch_norm},
      {"cross_entropy", case_cross_entropy}, {"gather_cols", case_gather_cols},
  };
  SuiteResult out;
  uint64_t op_salt = 0;
  for (const Op& op : ops) {
    Rng rng(seed ^ (0x6f70ull << 32) ^ op_salt++);
    for (int c = 0; c < cases_per_op; ++c) {
      Report r = op.fn(rng);
      ++out.cases;
      out.checked += r.checked;
      out.failures += r.failures;
      if (r.max_rel > out.max_rel) {
        out.max_rel = r.max_rel;
        out.worst = std::string(op.name) + " " + r.worst;
      }
    }
  }
  return out;
}

}  // namespace gradcheck
