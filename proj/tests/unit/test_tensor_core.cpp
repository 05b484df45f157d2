#include <doctest.h>

#include <cmath>

#include "aisf/autograd.hpp"
#include "aisf/errors.hpp"
#include "aisf/gradcheck.hpp"
#include "aisf/ops.hpp"
#include "aisf/rng.hpp"
#include "aisf/tensor.hpp"

using namespace aisf;

TEST_CASE("tensor shape and storage")
{
    const Tensor t({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.at(1, 2) == 1.5);
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
    CHECK_THROWS_AS((void)t.at(2, 0), DimensionError);
    CHECK(Tensor().size() == shape_numel(Tensor().shape()));

    const Tensor r = Tensor::from({2, 2}, {1, 2, 3, 4}).reshaped({4});
    CHECK(r.shape() == Shape{4});
    CHECK_THROWS_AS((void)r.reshaped({3}), DimensionError);

    const Tensor s = Tensor::from({1, 2, 3}, {1, 2, 3, 4, 5, 6}).swapped_last();
    CHECK(s.shape() == Shape{1, 3, 2});
    CHECK(s.values() == std::vector<double>{1, 4, 2, 5, 3, 6});
}

TEST_CASE("matmul")
{
    Tape tape;
    const auto eye = tape.constant(Tensor::from({2, 2}, {1, 0, 0, 1}));
    const auto m = tape.constant(Tensor::from({2, 2}, {1, 2, 3, 4}));
    CHECK(op::matmul(eye, m).value().values() == std::vector<double>{1, 2, 3, 4});

    const auto row = tape.constant(Tensor::from({1, 2}, {1, 2}));
    const auto col = tape.constant(Tensor::from({2, 1}, {3, 4}));
    CHECK(op::matmul(row, col).value().values() == std::vector<double>{11});

    const auto a = tape.constant(Tensor({3, 4}));
    const auto b = tape.constant(Tensor({5, 2}));
    try {
        (void)op::matmul(a, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(3,4)") != std::string::npos);
        CHECK(msg.find("(5,2)") != std::string::npos);
    }
}

TEST_CASE("crosscorr1d")
{
    Tape tape;
    const auto in = tape.constant(Tensor::from({1, 1, 3}, {1, 2, 3}));
    const auto zero_bias = tape.constant(Tensor({1}));
    const auto ident = tape.constant(Tensor::from({1, 1, 3}, {0, 1, 0}));
    CHECK(op::crosscorr1d(in, ident, zero_bias).value().values() == std::vector<double>{1, 2, 3});

    const auto ones = tape.constant(Tensor::from({1, 1, 3}, {1, 1, 1}));
    CHECK(op::crosscorr1d(in, ones, zero_bias).value().values() == std::vector<double>{3, 6, 5});

    const auto x = tape.constant(Tensor({2, 15, 5}, 0.3));
    const auto w = tape.constant(Tensor({128, 15, 3}, 0.01));
    const auto b = tape.constant(Tensor({128}));
    CHECK(op::crosscorr1d(x, w, b).shape() == Shape{2, 128, 5});

    CHECK_THROWS_AS((void)op::crosscorr1d(x, tape.constant(Tensor({128, 15, 2})), b), DimensionError);
    CHECK_THROWS_AS((void)op::crosscorr1d(x, tape.constant(Tensor({128, 14, 3})), b), DimensionError);
}

TEST_CASE("crosscorr1d identity kernel is the identity for any input")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t bsz = 1 + rng.below(3), c = 1 + rng.below(5), len = 1 + rng.below(9);
        Tensor x({bsz, c, len});
        for (double& v : x.data()) v = rng.normal();
        Tensor w({c, c, 3});
        for (std::size_t i = 0; i < c; ++i) w.at(i, i, 1) = 1.0;
        Tape tape;
        const auto y = op::crosscorr1d(tape.constant(x), tape.constant(w), tape.constant(Tensor({c})));
        CHECK(y.value() == x);
    }
}

TEST_CASE("elementwise values")
{
    Tape tape;
    const auto x = tape.constant(Tensor::from({3}, {0.0, -2.5, 2.5}));
    CHECK(op::tanh(x).value()[0] == 0.0);
    CHECK(op::sigmoid(x).value()[0] == 0.5);
    CHECK(op::relu(x).value().values() == std::vector<double>{0.0, 0.0, 2.5});
    CHECK_THROWS_AS((void)op::add(x, tape.constant(Tensor({2}))), DimensionError);
}

TEST_CASE("backward")
{
    Tape tape;
    const auto x = tape.variable(Tensor({2, 3}, 0.7));
    tape.backward(op::sum(x));
    CHECK(tape.grad(x) == Tensor({2, 3}, 1.0));

    Tape t2;
    const auto y = t2.variable(Tensor::from({3}, {1, 2, 3}));
    t2.backward(op::sum(op::mul(y, y)));
    CHECK(t2.grad(y).values() == std::vector<double>{2, 4, 6});

    Tape t3;
    const auto z = t3.variable(Tensor({2}, 1.0));
    CHECK_THROWS_AS(t3.backward(op::scale(z, 2.0)), DimensionError);
}

TEST_CASE("fan-out accumulates additively")
{
    Tape tape;
    const auto x = tape.variable(Tensor::from({2}, {1.5, -2.0}));
    const auto y = op::add(op::mul(x, x), op::scale(x, 3.0));
    tape.backward(op::sum(y));
    CHECK(tape.grad(x).values() == std::vector<double>{2 * 1.5 + 3, 2 * -2.0 + 3});
}

TEST_CASE("parameters receive gradients in their own slot")
{
    Parameter p("w", Tensor::from({2}, {3, 4}));
    Tape tape;
    tape.backward(op::sum(op::mul(tape.parameter(p), tape.parameter(p))));
    CHECK(p.grad.values() == std::vector<double>{6, 8});
}

TEST_CASE("rng determinism and streams")
{
    Rng a(2021), b(2021);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(2021), d(2121);
    CHECK(c.next_u64() != d.next_u64());
    const Rng root(2021);
    CHECK(root.fork(Stream::kInit).next_u64() != root.fork(Stream::kShuffle).next_u64());
    Rng e(5, 1), f(5, 2);
    CHECK(e.next_u64() != f.next_u64());

    Rng u(7);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK((v >= 0.0 && v < 1.0));
        CHECK(u.below(7) < 7);
    }
}

TEST_CASE("gradient check rows for every primitive")
{
    gradcheck::Options opt;
    opt.filter = "op.";
    const auto rows = gradcheck::run(opt);
    CHECK(rows.size() >= 20);
    for (const auto& r : rows) {
        INFO(r.name << " " << r.max_rel_error);
        CHECK(r.trials == 100);
        CHECK(r.passed);
    }
}
