#include "hrt/bt/node.hpp"

#include <algorithm>
#include <set>

namespace hrt::bt {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Sequence: return "Sequence";
        case NodeKind::Fallback: return "Fallback";
        case NodeKind::Parallel: return "Parallel";
        case NodeKind::Decorator: return "Decorator";
        case NodeKind::Condition: return "Condition";
        case NodeKind::Action: return "Action";
    }
    return "?";
}

Node::Node(std::string name, NodeKind kind) : name_(std::move(name)), kind_(kind) {}

NodeStatus Node::tick(TickContext& ctx) {
    NodeStatus status = on_tick(ctx);
    last_status_ = status;
    if (ctx.observer) {
        ctx.observer(*this, status);
    }
    return status;
}

void Node::halt() {
    last_status_.reset();
    halt_children();
}

void Node::halt_children() {
    for (auto& c : children_) {
        c->halt();
    }
}

Node& Node::add_child(std::unique_ptr<Node> child) {
    if (!child) {
        throw StructuralError("null child added to '" + name_ + "'");
    }
    children_.push_back(std::move(child));
    return *children_.back();
}

void Node::validate() const {}

// Sequence

NodeStatus Sequence::on_tick(TickContext& ctx) {
    while (current_ < children().size()) {
        NodeStatus status = child(current_).tick(ctx);
        if (status == NodeStatus::Running) {
            return NodeStatus::Running;
        }
        if (status == NodeStatus::Failure) {
            current_ = 0;
            return NodeStatus::Failure;
        }
        ++current_;
    }
    current_ = 0;
    return NodeStatus::Success;
}

void Sequence::halt() {
    current_ = 0;
    Node::halt();
}

// Fallback

NodeStatus Fallback::on_tick(TickContext& ctx) {
    while (current_ < children().size()) {
        NodeStatus status = child(current_).tick(ctx);
        if (status == NodeStatus::Running) {
            return NodeStatus::Running;
        }
        if (status == NodeStatus::Success) {
            current_ = 0;
            return NodeStatus::Success;
        }
        ++current_;
    }
    current_ = 0;
    return NodeStatus::Failure;
}

void Fallback::halt() {
    current_ = 0;
    Node::halt();
}

// Parallel

std::size_t Parallel::threshold() const { return threshold_.value_or(children().size()); }

void Parallel::validate() const {
    const std::size_t m = threshold();
    if (m < 1 || m > children().size()) {
        throw StructuralError("parallel '" + name() + "' needs 1 <= threshold <= " +
                              std::to_string(children().size()) + ", got " + std::to_string(m));
    }
}

NodeStatus Parallel::on_tick(TickContext& ctx) {
    const std::size_t n = children().size();
    results_.resize(n);
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!results_[i]) {
            NodeStatus status = child(i).tick(ctx);
            if (status != NodeStatus::Running) {
                results_[i] = status;
            }
        }
        if (results_[i] == NodeStatus::Success) {
            ++succeeded;
        } else if (results_[i] == NodeStatus::Failure) {
            ++failed;
        }
    }
    const std::size_t m = threshold();
    if (succeeded >= m) {
        halt();
        return NodeStatus::Success;
    }
    if (failed > n - m) {
        halt();
        return NodeStatus::Failure;
    }
    return NodeStatus::Running;
}

void Parallel::halt() {
    results_.clear();
    Node::halt();
}

// Decorators and leaves

void Decorator::validate() const {
    if (children().size() != 1) {
        throw StructuralError("decorator '" + name() + "' must have exactly one child, has " +
                              std::to_string(children().size()));
    }
}

NodeStatus Inverter::on_tick(TickContext& ctx) {
    switch (decorated().tick(ctx)) {
        case NodeStatus::Success: return NodeStatus::Failure;
        case NodeStatus::Failure: return NodeStatus::Success;
        case NodeStatus::Running: return NodeStatus::Running;
    }
    return NodeStatus::Running;
}

void ConditionNode::validate() const {
    if (!children().empty()) {
        throw StructuralError("condition '" + name() + "' cannot have children");
    }
}

NodeStatus ConditionNode::on_tick(TickContext& ctx) {
    return check(ctx) ? NodeStatus::Success : NodeStatus::Failure;
}

void ActionNode::validate() const {
    if (!children().empty()) {
        throw StructuralError("action '" + name() + "' cannot have children");
    }
}

// Tree

Tree::Tree(std::unique_ptr<Node> root) : root_(std::move(root)) {
    if (!root_) {
        throw StructuralError("tree without root");
    }
    std::set<const Node*> seen;
    std::vector<Node*> stack{root_.get()};
    while (!stack.empty()) {
        Node* node = stack.back();
        stack.pop_back();
        if (!seen.insert(node).second) {
            throw StructuralError("node '" + node->name() + "' has more than one parent");
        }
        node->validate();
        node->id_ = nodes_.size();
        nodes_.push_back(node);
        auto kids = node->children();
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
            stack.push_back(it->get());
        }
    }
}

NodeStatus Tree::tick(Blackboard& board, const TickObserver& observer) {
    TickContext ctx{board, observer};
    return root_->tick(ctx);
}

std::size_t Tree::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<const Node*, std::size_t>> stack{{root_.get(), 1}};
    while (!stack.empty()) {
        auto [node, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        for (const auto& c : node->children()) {
            stack.emplace_back(c.get(), d + 1);
        }
    }
    return best;
}

}  // namespace hrt::bt
