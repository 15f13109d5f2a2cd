#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gvlm/tape.hpp"
#include "gvlm/tensor.hpp"

namespace gvlm {

/// Named parameter bank: value, gradient, and AdamW moments per entry,
/// plus a shared step counter. Iteration follows insertion order so
/// checkpoints and optimizer sweeps are reproducible.
class ParamStore {
public:
    struct Entry {
        Tensor2D value;
        Tensor2D grad;
        Tensor2D m;
        Tensor2D v;
        bool trainable = true;
    };

    Tensor2D& add(const std::string& name, Tensor2D init, bool trainable = true);
    bool has(const std::string& name) const;
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    Tensor2D& value(const std::string& name) { return entry(name).value; }
    const std::vector<std::string>& names() const { return order_; }

    void zero_grads();
    void set_trainable_all(bool trainable);
    void set_trainable_prefix(const std::string& prefix, bool trainable);
    double grad_norm(const std::string& name) const;

    std::uint64_t step() const { return step_; }
    void set_step(std::uint64_t s) { step_ = s; }

    std::vector<std::uint8_t> save() const;
    static ParamStore load(const std::vector<std::uint8_t>& bytes);
    void save_file(const std::string& path) const;
    static ParamStore load_file(const std::string& path);

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Entry> entries_;
    std::uint64_t step_ = 0;
};

/// Binds ParamStore entries to tape leaves while building a graph, and
/// collects node gradients back into the store afterwards.
class ParamUse {
public:
    ParamUse(Tape& tape, ParamStore& store) : tape_(&tape), store_(&store) {}

    /// Leaf for the named parameter (created once per tape).
    Value p(const std::string& name);
    /// Leaf for a constant; never collected.
    Value c(Tensor2D v) { return tape_->leaf(std::move(v)); }

    Tape& tape() { return *tape_; }
    ParamStore& store() { return *store_; }
    const std::map<std::string, Value>& bindings() const { return bound_; }

    /// Adds tape gradients of bound parameters into store grads.
    /// Non-trainable entries are skipped unless include_frozen is set.
    void collect_grads(bool include_frozen = false);

private:
    Tape* tape_;
    ParamStore* store_;
    std::map<std::string, Value> bound_;
};

/// One decoupled-weight-decay Adam step over all trainable entries with
/// bias-corrected moments. Increments the store step counter.
void adamw_step(ParamStore& store, double lr, double weight_decay,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// lr_min + 0.5 (lr_max - lr_min) (1 + cos(pi step / total_steps)).
double cosine_lr(std::uint64_t step, std::uint64_t total_steps,
                 double lr_max = 1e-4, double lr_min = 1e-6);

/// Central finite differences against reverse-mode gradients over every
/// element of every parameter the function binds. Returns
/// max |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
double grad_check(ParamStore& store,
                  const std::function<Value(Tape&, ParamUse&)>& f,
                  double eps = 1e-5);

}  // namespace gvlm
