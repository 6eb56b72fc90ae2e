#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrt/bt/blackboard.hpp"
#include "hrt/bt/status.hpp"

namespace hrt::bt {

enum class NodeKind { Sequence, Fallback, Parallel, Decorator, Condition, Action };

std::string_view to_string(NodeKind kind);

/// Raised when a tree violates the node taxonomy (wrong child counts,
/// bad parallel threshold, shared subtrees). Detected before the first tick.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Node;

using TickObserver = std::function<void(const Node&, NodeStatus)>;

struct TickContext {
    Blackboard& board;
    TickObserver observer;
};

class Node {
public:
    Node(std::string name, NodeKind kind);
    virtual ~Node() = default;

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    NodeStatus tick(TickContext& ctx);

    /// Clears the node's memory (and that of its subtree) so that the next
    /// tick starts from scratch.
    virtual void halt();

    Node& add_child(std::unique_ptr<Node> child);

    template <typename T, typename... Args>
    T& emplace_child(Args&&... args) {
        auto child = std::make_unique<T>(std::forward<Args>(args)...);
        T& ref = *child;
        add_child(std::move(child));
        return ref;
    }

    [[nodiscard]] std::size_t id() const { return id_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] NodeKind kind() const { return kind_; }
    [[nodiscard]] std::span<const std::unique_ptr<Node>> children() const { return children_; }
    [[nodiscard]] std::optional<NodeStatus> last_status() const { return last_status_; }

    /// Kind-specific structural check, called by `Tree` before ticking.
    virtual void validate() const;

protected:
    virtual NodeStatus on_tick(TickContext& ctx) = 0;

    Node& child(std::size_t i) { return *children_.at(i); }
    void halt_children();

    std::string key(std::string_view name) const { return node_key(id_, name); }

private:
    friend class Tree;

    std::string name_;
    NodeKind kind_;
    std::size_t id_ = 0;
    std::vector<std::unique_ptr<Node>> children_;
    std::optional<NodeStatus> last_status_;
};

/// Sequence with memory: children that already succeeded are not ticked
/// again until the sequence itself completes.
class Sequence : public Node {
public:
    explicit Sequence(std::string name = "Sequence") : Node(std::move(name), NodeKind::Sequence) {}
    void halt() override;

protected:
    NodeStatus on_tick(TickContext& ctx) override;

private:
    std::size_t current_ = 0;
};

/// Fallback with memory: failed children are skipped until completion.
class Fallback : public Node {
public:
    explicit Fallback(std::string name = "Fallback") : Node(std::move(name), NodeKind::Fallback) {}
    void halt() override;

protected:
    NodeStatus on_tick(TickContext& ctx) override;

private:
    std::size_t current_ = 0;
};

/// Succeeds once `threshold` children succeeded, fails once more than
/// `children - threshold` failed. Finished children are not re-ticked.
/// Without an explicit threshold every child must succeed.
class Parallel : public Node {
public:
    explicit Parallel(std::optional<std::size_t> threshold = std::nullopt, std::string name = "Parallel")
        : Node(std::move(name), NodeKind::Parallel), threshold_(threshold) {}

    [[nodiscard]] std::size_t threshold() const;
    void halt() override;
    void validate() const override;

protected:
    NodeStatus on_tick(TickContext& ctx) override;

private:
    std::optional<std::size_t> threshold_;
    std::vector<std::optional<NodeStatus>> results_;
};

class Decorator : public Node {
public:
    explicit Decorator(std::string name) : Node(std::move(name), NodeKind::Decorator) {}
    void validate() const override;

protected:
    Node& decorated() { return child(0); }
};

class Inverter : public Decorator {
public:
    explicit Inverter(std::string name = "Inverter") : Decorator(std::move(name)) {}

protected:
    NodeStatus on_tick(TickContext& ctx) override;
};

/// Base for condition leaves: the answer is a boolean, so Running cannot
/// be produced.
class ConditionNode : public Node {
public:
    explicit ConditionNode(std::string name) : Node(std::move(name), NodeKind::Condition) {}
    void validate() const override;

protected:
    virtual bool check(TickContext& ctx) = 0;

private:
    NodeStatus on_tick(TickContext& ctx) final;
};

class Condition : public ConditionNode {
public:
    using Predicate = std::function<bool(TickContext&)>;
    Condition(std::string name, Predicate predicate)
        : ConditionNode(std::move(name)), predicate_(std::move(predicate)) {}

protected:
    bool check(TickContext& ctx) override { return predicate_(ctx); }

private:
    Predicate predicate_;
};

class ActionNode : public Node {
public:
    explicit ActionNode(std::string name) : Node(std::move(name), NodeKind::Action) {}
    void validate() const override;
};

class Action : public ActionNode {
public:
    using Body = std::function<NodeStatus(TickContext&)>;
    Action(std::string name, Body body) : ActionNode(std::move(name)), body_(std::move(body)) {}

protected:
    NodeStatus on_tick(TickContext& ctx) override { return body_(ctx); }

private:
    Body body_;
};

/// Owns a rooted tree. Construction validates the structure and assigns
/// node ids in pre-order (root = 0).
class Tree {
public:
    explicit Tree(std::unique_ptr<Node> root);

    NodeStatus tick(Blackboard& board, const TickObserver& observer = {});
    void halt() { root_->halt(); }

    [[nodiscard]] Node& root() { return *root_; }
    [[nodiscard]] const Node& root() const { return *root_; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] std::size_t depth() const;

    /// Pre-order list of all nodes.
    [[nodiscard]] std::span<Node* const> nodes() const { return nodes_; }

private:
    std::unique_ptr<Node> root_;
    std::vector<Node*> nodes_;
};

}  // namespace hrt::bt
