#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <deque>
#include <vector>

#include "aisf/tensor.hpp"

namespace aisf {

/// A trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
      : name(std::move(n))
      , value(std::move(v))
      , grad(value.shape())
    { }

    void zero_grad() { grad = Tensor(value.shape()); }
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    [[nodiscard]] const Tensor& value() const;
    [[nodiscard]] const Shape& shape() const { return value().shape(); }
    [[nodiscard]] std::size_t id() const { return id_; }
    [[nodiscard]] Tape* tape() const { return tape_; }
    [[nodiscard]] bool requires_grad() const;

private:
    friend class Tape;
    Var(Tape* t, std::size_t id)
      : tape_(t)
      , id_(id)
    { }

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode gradient tape.
///
/// Nodes are appended in evaluation order, so walking the node list backwards
/// is a valid reverse topological order. Gradients are summed at fan-out.
/// Not thread-safe; one tape per forward/backward pass.
class Tape {
public:
    /// Receives the gradient and value of the node's output and pushes
    /// contributions to its inputs through `accumulate`.
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out, const Tensor& out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Leaf that requires a gradient; read it back with `grad()`.
    Var variable(Tensor value);
    /// Leaf aliasing `p.value`; backward adds dLoss/dp into `p.grad`.
    /// `p` must outlive the tape's backward pass.
    Var parameter(Parameter& p);

    /// Records a computed node. `fn` is dropped when no input requires grad.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
    Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

    [[nodiscard]] const Tensor& value(std::size_t id) const;
    [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    /// Adds `g` into the gradient slot of node `id` if it tracks gradients.
    void accumulate(std::size_t id, const Tensor& g);
    /// Zero-initialised gradient buffer of node `id` for in-place accumulation.
    Tensor& grad_buffer(std::size_t id);

    /// Runs the backward pass from a scalar loss. Throws DimensionError for a
    /// non-scalar loss and StateError for an empty tape.
    void backward(Var loss);

    /// Gradient of `v` after `backward`; zeros when nothing flowed into it.
    [[nodiscard]] Tensor grad(Var v) const;

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        const Tensor* ref = nullptr;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        BackwardFn backward;
        Tensor* sink = nullptr;
    };

    Var push(Node node);

    // deque: references to existing nodes survive appends.
    std::deque<Node> nodes_;
};

}  // namespace aisf
