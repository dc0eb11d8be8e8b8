#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nhnn/gradcheck.hpp"
#include "nhnn/tape.hpp"
#include "oracles.hpp"

using namespace nhnn;

namespace {

// Gradient check scaffold: builds a scalar loss from a single input leaf and
// compares the tape gradient against central differences.
double check_gradient(const MatD& x0,
                      const std::function<Var<double>(Tape<double>&, Var<double>)>& build) {
    auto f = [&](const MatD& x) {
        Tape<double> tape;
        Var<double> v = leaf(tape, x);
        return build(tape, v).value()(0, 0);
    };
    Tape<double> tape;
    Var<double> v = leaf(tape, x0);
    Var<double> loss = build(tape, v);
    tape.backward(loss.id);
    MatD fd = finite_difference_gradient(f, x0);
    return max_relative_error(v.grad(), fd);
}

SegmentMap random_segments(int rows, int segments, std::mt19937_64& rng, bool allow_empty = true) {
    SegmentMap map;
    map.num_input_rows = rows;
    std::vector<std::vector<int>> groups(segments);
    std::uniform_int_distribution<int> pick(0, segments - 1);
    for (int r = 0; r < rows; ++r) groups[pick(rng)].push_back(r);
    if (!allow_empty)
        for (auto& g : groups)
            if (g.empty()) g.push_back(std::uniform_int_distribution<int>(0, rows - 1)(rng));
    map.offsets.push_back(0);
    for (auto& g : groups) {
        map.indices.insert(map.indices.end(), g.begin(), g.end());
        map.offsets.push_back(static_cast<int>(map.indices.size()));
    }
    return map;
}

}  // namespace

TEST_CASE("matmul forward and gradient") {
    std::mt19937_64 rng(1);
    MatD a = oracle::random_matrix(3, 4, rng);
    MatD b = oracle::random_matrix(4, 2, rng);
    Tape<double> tape;
    Var<double> va = leaf(tape, a), vb = leaf(tape, b);
    Var<double> c = matmul(va, vb);
    CHECK((c.value() - a * b).norm() == doctest::Approx(0.0));

    CHECK(check_gradient(a, [&](Tape<double>& t, Var<double> v) {
              Var<double> w = leaf(t, b);
              return sum_all(matmul(v, w));
          }) < 1e-7);
    CHECK_THROWS_AS(matmul(va, va), ShapeMismatch);
}

TEST_CASE("elementwise ops gradients") {
    std::mt19937_64 rng(2);
    MatD x = oracle::random_matrix(4, 3, rng);
    MatD y = oracle::random_matrix(4, 3, rng);
    for (auto build : {
             +[](Tape<double>& t, Var<double> v, const MatD& other) {
                 return sum_all(add(v, leaf(t, other)));
             },
             +[](Tape<double>& t, Var<double> v, const MatD& other) {
                 return sum_all(sub(v, leaf(t, other)));
             },
             +[](Tape<double>& t, Var<double> v, const MatD& other) {
                 return sum_all(mul_elementwise(v, leaf(t, other)));
             },
         }) {
        CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v) { return build(t, v, y); }) <
              1e-7);
    }
    CHECK(check_gradient(x, [](Tape<double>&, Var<double> v) {
              return sum_all(scale(v, 2.5));
          }) < 1e-8);
}

TEST_CASE("f(x)=sum x^2 has gradient 2x") {
    Tape<double> tape;
    MatD x(1, 2);
    x << 1.0, 2.0;
    Var<double> v = leaf(tape, x);
    Var<double> loss = sum_all(mul_elementwise(v, v));
    tape.backward(loss.id);
    CHECK(v.grad()(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(v.grad()(0, 1) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("sigmoid and tanh gradients") {
    std::mt19937_64 rng(3);
    MatD x = oracle::random_matrix(5, 4, rng);
    CHECK(check_gradient(x, [](Tape<double>&, Var<double> v) { return sum_all(sigmoid(v)); }) <
          1e-7);
    CHECK(check_gradient(x, [](Tape<double>&, Var<double> v) { return sum_all(tanh_op(v)); }) <
          1e-7);
}

TEST_CASE("l2_normalize_rows: unit rows and gradient") {
    std::mt19937_64 rng(4);
    MatD x = oracle::random_matrix(6, 5, rng);
    Tape<double> tape;
    Var<double> v = leaf(tape, x);
    Var<double> y = l2_normalize_rows(v, 1e-12);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        CHECK(y.value().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

    // zero row passes through the eps guard
    MatD z = MatD::Zero(1, 3);
    Tape<double> t2;
    Var<double> vz = leaf(t2, z);
    CHECK(l2_normalize_rows(vz, 1e-12).value().isZero());

    MatD weights = oracle::random_matrix(6, 5, rng);
    CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v2) {
              return sum_all(mul_elementwise(l2_normalize_rows(v2, 1e-12), leaf(t, weights)));
          }) < 1e-6);
}

TEST_CASE("layer_norm: pre-affine rows standardized, gradient correct") {
    std::mt19937_64 rng(5);
    MatD x = oracle::random_matrix(7, 6, rng, 3.0);
    Tape<double> tape;
    Var<double> v = leaf(tape, x);
    Var<double> gamma = leaf(tape, MatD::Ones(1, 6));
    Var<double> beta = leaf(tape, MatD::Zero(1, 6));
    Var<double> y = layer_norm(v, gamma, beta, 1e-5);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        CHECK(std::abs(y.value().row(i).mean()) < 1e-6);
        const double var = (y.value().row(i).array() - y.value().row(i).mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shifts variance slightly
    }

    // constant rows map to zeros via the eps guard
    Tape<double> t2;
    Var<double> vc = leaf(t2, MatD::Constant(2, 4, 3.0));
    Var<double> g2 = leaf(t2, MatD::Ones(1, 4));
    Var<double> b2 = leaf(t2, MatD::Zero(1, 4));
    CHECK(layer_norm(vc, g2, b2, 1e-5).value().isZero(1e-12));

    MatD weights = oracle::random_matrix(7, 6, rng);
    MatD gm = oracle::random_matrix(1, 6, rng);
    MatD bt = oracle::random_matrix(1, 6, rng);
    CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v2) {
              Var<double> g = leaf(t, gm), b = leaf(t, bt);
              return sum_all(mul_elementwise(layer_norm(v2, g, b, 1e-5), leaf(t, weights)));
          }) < 1e-5);
    // gradient through gamma as well
    CHECK(check_gradient(gm, [&](Tape<double>& t, Var<double> g) {
              Var<double> v2 = leaf(t, x), b = leaf(t, bt);
              return sum_all(mul_elementwise(layer_norm(v2, g, b, 1e-5), leaf(t, weights)));
          }) < 1e-5);
}

TEST_CASE("chunk_cols then concat_cols is the identity") {
    std::mt19937_64 rng(6);
    MatD x = oracle::random_matrix(5, 12, rng);
    Tape<double> tape;
    Var<double> v = leaf(tape, x);
    for (int k : {1, 2, 3, 4, 6}) {
        Var<double> back = concat_cols(chunk_cols(v, k));
        CHECK((back.value() - x).norm() == 0.0);
    }
    CHECK_THROWS_AS(chunk_cols(v, 5), ShapeMismatch);
}

TEST_CASE("segment_mean matches loop oracle and handles edge cases") {
    // singleton segment: row unchanged
    SegmentMap single{{0, 1}, {0}, 1};
    Tape<double> tape;
    MatD x(1, 3);
    x << 1.5, -2.0, 0.5;
    Var<double> v = leaf(tape, x);
    CHECK((segment_mean(v, single).value() - x).norm() == 0.0);

    // symmetric mean
    SegmentMap pair{{0, 2}, {0, 1}, 2};
    MatD x2(2, 2);
    x2 << 1, 1, 3, 3;
    Tape<double> t2;
    Var<double> v2 = leaf(t2, x2);
    MatD expect(1, 2);
    expect << 2, 2;
    CHECK((segment_mean(v2, pair).value() - expect).norm() == 0.0);

    // random instances vs loop oracle, up to R=200, empty segments allowed
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 7 + trial * 48;  // 7 .. 199
        MatD xr = oracle::random_matrix(rows, 3, rng);
        SegmentMap map = random_segments(rows, 3 + trial, rng);
        Tape<double> t3;
        Var<double> v3 = leaf(t3, xr);
        CHECK((segment_mean(v3, map).value() - oracle::segment_mean(xr, map)).cwiseAbs().maxCoeff() <
              1e-12);
        MatD wfixed = oracle::random_matrix(map.num_segments(), 3, rng);
        CHECK(check_gradient(xr, [&](Tape<double>& t, Var<double> vv) {
                  return sum_all(mul_elementwise(segment_mean(vv, map), leaf(t, wfixed)));
              }) < 1e-6);
    }
}

TEST_CASE("segment_weighted_sum + segment_sum match loop oracle") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 10 + trial * 40;
        MatD x = oracle::random_matrix(rows, 4, rng);
        Eigen::VectorXd w = oracle::random_matrix(rows, 1, rng).col(0);
        SegmentMap map = random_segments(rows, 4, rng);
        auto [expect_sum, expect_wsum] = oracle::segment_weighted_sum(x, w, map);

        Tape<double> tape;
        Var<double> vx = leaf(tape, x);
        Var<double> vw = leaf(tape, MatD(w));
        CHECK((segment_weighted_sum(vx, vw, map).value() - expect_sum).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((segment_sum(vw, map).value() - expect_wsum).cwiseAbs().maxCoeff() < 1e-12);

        // gradients through both arguments
        CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> vv) {
                  Var<double> ww = leaf(t, MatD(w));
                  return sum_all(segment_weighted_sum(vv, ww, map));
              }) < 1e-6);
        CHECK(check_gradient(MatD(w), [&](Tape<double>& t, Var<double> ww) {
                  Var<double> vv = leaf(t, x);
                  return sum_all(segment_weighted_sum(vv, ww, map));
              }) < 1e-6);
    }
}

TEST_CASE("segment_mean broadcast-back is idempotent on segment-constant input") {
    std::mt19937_64 rng(9);
    SegmentMap map = random_segments(20, 4, rng, /*allow_empty=*/false);
    // build a segment-constant input
    MatD values = oracle::random_matrix(4, 3, rng);
    MatD x(20, 3);
    for (int s = 0; s < map.num_segments(); ++s)
        for (int idx : map.segment(s)) x.row(idx) = values.row(s);
    Tape<double> tape;
    Var<double> v = leaf(tape, x);
    MatD means = segment_mean(v, map).value();
    for (int s = 0; s < map.num_segments(); ++s)
        for (int idx : map.segment(s))
            CHECK((means.row(s) - x.row(idx)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross_entropy of uniform logits is ln C") {
    Tape<double> tape;
    Var<double> logits = leaf(tape, MatD::Zero(5, 3));
    std::vector<int> labels{0, 1, 2, 0, 1};
    Var<double> loss = cross_entropy(logits, labels);
    CHECK(loss.value()(0, 0) == doctest::Approx(std::log(3.0)).epsilon(1e-6));
    CHECK(loss.value()(0, 0) == doctest::Approx(1.0986123).epsilon(1e-6));

    // gradient rows sum to zero (softmax minus one-hot)
    tape.backward(loss.id);
    // find the logits gradient: ln-softmax node sits between, so use fd
    auto f = [&](const MatD& x) {
        Tape<double> t;
        return cross_entropy(leaf(t, x), labels).value()(0, 0);
    };
    MatD fd = finite_difference_gradient(f, MatD::Zero(5, 3));
    for (Eigen::Index i = 0; i < fd.rows(); ++i) CHECK(std::abs(fd.row(i).sum()) < 1e-10);
}

TEST_CASE("cross_entropy matches loop oracle and respects masks") {
    std::mt19937_64 rng(10);
    MatD logits = oracle::random_matrix(8, 4, rng);
    std::vector<int> labels;
    std::uniform_int_distribution<int> pick(0, 3);
    for (int i = 0; i < 8; ++i) labels.push_back(pick(rng));
    std::vector<std::uint8_t> mask{1, 0, 1, 1, 0, 1, 0, 1};

    Tape<double> tape;
    Var<double> v = leaf(tape, logits);
    CHECK(cross_entropy(v, labels, mask).value()(0, 0) ==
          doctest::Approx(oracle::cross_entropy(logits, labels, mask)).epsilon(1e-12));
    CHECK(check_gradient(logits, [&](Tape<double>&, Var<double> vv) {
              return cross_entropy(vv, labels, mask);
          }) < 1e-6);
}

TEST_CASE("log_softmax gradient") {
    std::mt19937_64 rng(11);
    MatD x = oracle::random_matrix(4, 5, rng);
    MatD w = oracle::random_matrix(4, 5, rng);
    CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v) {
              return sum_all(mul_elementwise(log_softmax(v), leaf(t, w)));
          }) < 1e-6);
}

TEST_CASE("dropout: identity in eval, rescaled mask in training") {
    std::mt19937_64 rng(12);
    MatD x = MatD::Ones(50, 40);
    Tape<double> tape;
    Var<double> v = leaf(tape, x);
    Var<double> eval_out = dropout(v, 0.5, rng, false);
    CHECK(eval_out.id == v.id);  // identity, no new node

    Var<double> train_out = dropout(v, 0.5, rng, true);
    int zeros = 0;
    for (Eigen::Index i = 0; i < train_out.rows(); ++i)
        for (Eigen::Index j = 0; j < train_out.cols(); ++j) {
            const double val = train_out.value()(i, j);
            CHECK((val == 0.0 || val == doctest::Approx(2.0)));
            zeros += val == 0.0;
        }
    CHECK(zeros > 700);  // ~1000 of 2000 expected
    CHECK(zeros < 1300);
}

TEST_CASE("scale_rows, div_rows_guard, row_sum, add_rowvec gradients") {
    std::mt19937_64 rng(13);
    MatD x = oracle::random_matrix(6, 4, rng);
    MatD c = oracle::random_matrix(6, 1, rng).cwiseAbs() + MatD::Constant(6, 1, 0.5);
    MatD b = oracle::random_matrix(1, 4, rng);

    CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v) {
              return sum_all(scale_rows(v, leaf(t, c)));
          }) < 1e-7);
    CHECK(check_gradient(c, [&](Tape<double>& t, Var<double> vc) {
              return sum_all(scale_rows(leaf(t, x), vc));
          }) < 1e-7);
    CHECK(check_gradient(x, [&](Tape<double>& t, Var<double> v) {
              return sum_all(div_rows_guard(v, leaf(t, c), 1e-12));
          }) < 1e-6);
    CHECK(check_gradient(c, [&](Tape<double>& t, Var<double> vc) {
              return sum_all(div_rows_guard(leaf(t, x), vc, 1e-12));
          }) < 1e-6);
    CHECK(check_gradient(x, [](Tape<double>&, Var<double> v) { return sum_all(row_sum(v)); }) <
          1e-8);
    CHECK(check_gradient(b, [&](Tape<double>& t, Var<double> vb) {
              return sum_all(add_rowvec(leaf(t, x), vb));
          }) < 1e-8);
}

TEST_CASE("checked tape rejects non-finite leaves") {
    Tape<double> tape(/*checked=*/true);
    MatD bad(1, 2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(leaf(tape, bad));
}
