#include "aisf/autograd.hpp"

#include "aisf/errors.hpp"

namespace aisf {

const Tensor& Var::value() const
{
    return tape_->value(id_);
}

bool Var::requires_grad() const
{
    return tape_->requires_grad(id_);
}

Var Tape::push(Node node)
{
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value)
{
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::variable(Tensor value)
{
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::parameter(Parameter& p)
{
    Node n;
    n.ref = &p.value;
    n.requires_grad = true;
    n.sink = &p.grad;
    return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn)
{
    Node n;
    n.value = std::move(value);
    for (const Var& v : inputs) {
        if (v.tape() != this) {
            throw StateError("operation mixes nodes from different tapes");
        }
        n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    }
    if (n.requires_grad) {
        n.backward = std::move(fn);
    }
    return push(std::move(n));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn)
{
    Node n;
    n.value = std::move(value);
    for (const Var& v : inputs) {
        if (v.tape() != this) {
            throw StateError("operation mixes nodes from different tapes");
        }
        n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    }
    if (n.requires_grad) {
        n.backward = std::move(fn);
    }
    return push(std::move(n));
}

const Tensor& Tape::value(std::size_t id) const
{
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
}

Tensor& Tape::grad_buffer(std::size_t id)
{
    Node& n = nodes_[id];
    if (!n.has_grad) {
        n.grad = Tensor(value(id).shape());
        n.has_grad = true;
    }
    return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g)
{
    if (!nodes_[id].requires_grad) {
        return;
    }
    Node& n = nodes_[id];
    if (!n.has_grad) {
        if (g.shape() != value(id).shape()) {
            throw DimensionError("gradient shape " + shape_str(g.shape()) + " does not match node shape "
                                 + shape_str(value(id).shape()));
        }
        n.grad = g;
        n.has_grad = true;
        return;
    }
    n.grad.add_(g);
}

void Tape::backward(Var loss)
{
    if (nodes_.empty()) {
        throw StateError("backward on an empty tape");
    }
    if (loss.tape() != this) {
        throw StateError("loss belongs to a different tape");
    }
    if (value(loss.id()).size() != 1) {
        throw DimensionError("backward needs a scalar loss, got shape " + shape_str(value(loss.id()).shape()));
    }
    if (!nodes_[loss.id()].requires_grad) {
        return;
    }
    grad_buffer(loss.id()).fill(1.0);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad) {
            continue;
        }
        if (n.backward) {
            n.backward(*this, n.grad, value(i));
        }
        if (n.sink) {
            n.sink->add_(n.grad);
        }
    }
}

Tensor Tape::grad(Var v) const
{
    const Node& n = nodes_[v.id()];
    if (!n.has_grad) {
        return Tensor(value(v.id()).shape());
    }
    return n.grad;
}

}  // namespace aisf
