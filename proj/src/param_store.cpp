#include "gvlm/param_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "gvlm/serial.hpp"

namespace gvlm {

Tensor2D& ParamStore::add(const std::string& name, Tensor2D init, bool trainable) {
    if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    Entry e;
    e.grad = Tensor2D(init.rows, init.cols, 0.0);
    e.m = Tensor2D(init.rows, init.cols, 0.0);
    e.v = Tensor2D(init.rows, init.cols, 0.0);
    e.value = std::move(init);
    e.trainable = trainable;
    index_[name] = entries_.size();
    order_.push_back(name);
    entries_.push_back(std::move(e));
    return entries_.back().value;
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) > 0; }

ParamStore::Entry& ParamStore::entry(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
    return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
    return entries_[it->second];
}

void ParamStore::zero_grads() {
    for (Entry& e : entries_)
        std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

void ParamStore::set_trainable_all(bool trainable) {
    for (Entry& e : entries_) e.trainable = trainable;
}

void ParamStore::set_trainable_prefix(const std::string& prefix, bool trainable) {
    for (std::size_t i = 0; i < order_.size(); ++i) {
        if (order_[i].rfind(prefix, 0) == 0) entries_[i].trainable = trainable;
    }
}

double ParamStore::grad_norm(const std::string& name) const {
    const Entry& e = entry(name);
    double s = 0.0;
    for (double g : e.grad.data) s += g * g;
    return std::sqrt(s);
}

// Checkpoint layout: magic "GVLP", u32 version = 1, u32 entry count;
// per entry: u16 name length, name bytes, u32 rows, u32 cols, then
// little-endian f64 arrays for value, grad, m, v. Trailing u32 CRC32 of
// everything before it guards against corruption.
std::vector<std::uint8_t> ParamStore::save() const {
    ByteWriter w;
    w.bytes("GVLP", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (std::size_t i = 0; i < order_.size(); ++i) {
        const std::string& name = order_[i];
        const Entry& e = entries_[i];
        if (name.size() > 0xFFFF) throw std::invalid_argument("ParamStore: name too long");
        w.u16(static_cast<std::uint16_t>(name.size()));
        w.bytes(name.data(), name.size());
        w.u32(static_cast<std::uint32_t>(e.value.rows));
        w.u32(static_cast<std::uint32_t>(e.value.cols));
        w.f64_array(e.value.data);
        w.f64_array(e.grad.data);
        w.f64_array(e.m.data);
        w.f64_array(e.v.data);
    }
    w.append_crc();
    return std::move(w).take();
}

ParamStore ParamStore::load(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "GVLP checkpoint");
    r.check_crc();
    char magic[4];
    r.read_bytes(magic, 4);
    if (std::memcmp(magic, "GVLP", 4) != 0) throw DataError("GVLP checkpoint: bad magic");
    std::uint32_t version = r.u32();
    if (version != 1) throw DataError("GVLP checkpoint: unsupported version " + std::to_string(version));
    std::uint32_t count = r.u32();
    ParamStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t len = r.u16();
        std::string name(len, '\0');
        r.read_bytes(name.data(), len);
        std::uint32_t rows = r.u32();
        std::uint32_t cols = r.u32();
        Entry e;
        e.value = Tensor2D(rows, cols);
        e.grad = Tensor2D(rows, cols);
        e.m = Tensor2D(rows, cols);
        e.v = Tensor2D(rows, cols);
        r.f64_array(e.value.data);
        r.f64_array(e.grad.data);
        r.f64_array(e.m.data);
        r.f64_array(e.v.data);
        if (store.index_.count(name)) throw DataError("GVLP checkpoint: duplicate entry " + name);
        store.index_[name] = store.entries_.size();
        store.order_.push_back(name);
        store.entries_.push_back(std::move(e));
    }
    r.expect_end();
    return store;
}

void ParamStore::save_file(const std::string& path) const {
    std::vector<std::uint8_t> bytes = save();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path);
}

ParamStore ParamStore::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load(bytes);
}

Value ParamUse::p(const std::string& name) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Value v = tape_->leaf(store_->entry(name).value);
    bound_.emplace(name, v);
    return v;
}

void ParamUse::collect_grads(bool include_frozen) {
    for (const auto& [name, val] : bound_) {
        ParamStore::Entry& e = store_->entry(name);
        if (!e.trainable && !include_frozen) continue;
        const Tensor2D& g = val.grad();
        if (!g.same_shape(e.grad)) throw std::invalid_argument("collect_grads: shape drift on " + name);
        for (std::size_t i = 0; i < g.size(); ++i) e.grad.data[i] += g.data[i];
    }
}

void adamw_step(ParamStore& store, double lr, double weight_decay,
                double beta1, double beta2, double eps) {
    if (lr < 0.0) throw std::invalid_argument("adamw_step: negative learning rate");
    if (weight_decay < 0.0) throw std::invalid_argument("adamw_step: negative weight decay");
    store.set_step(store.step() + 1);
    const double t = static_cast<double>(store.step());
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (const std::string& name : store.names()) {
        ParamStore::Entry& e = store.entry(name);
        if (!e.trainable) continue;
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            double g = e.grad.data[i];
            // Decoupled decay, applied independently of the moment update.
            e.value.data[i] -= lr * weight_decay * e.value.data[i];
            e.m.data[i] = beta1 * e.m.data[i] + (1.0 - beta1) * g;
            e.v.data[i] = beta2 * e.v.data[i] + (1.0 - beta2) * g * g;
            double mhat = e.m.data[i] / bc1;
            double vhat = e.v.data[i] / bc2;
            e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr_max, double lr_min) {
    if (total_steps == 0) throw std::invalid_argument("cosine_lr: total_steps must be positive");
    if (step > total_steps) throw std::invalid_argument("cosine_lr: step beyond total_steps");
    double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * frac));
}

double grad_check(ParamStore& store, const std::function<Value(Tape&, ParamUse&)>& f, double eps) {
    // Reverse-mode pass.
    std::map<std::string, Tensor2D> ad_grads;
    {
        Tape tape;
        ParamUse use(tape, store);
        Value loss = f(tape, use);
        if (!std::isfinite(loss.scalar())) throw NumericError("grad_check: non-finite loss");
        tape.backward(loss);
        for (const auto& [name, val] : use.bindings()) ad_grads[name] = val.grad();
    }

    auto eval = [&]() {
        Tape tape;
        ParamUse use(tape, store);
        double v = f(tape, use).scalar();
        if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
        return v;
    };

    double worst = 0.0;
    for (const auto& [name, g_ad] : ad_grads) {
        Tensor2D& value = store.value(name);
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value.data[i];
            value.data[i] = saved + eps;
            double up = eval();
            value.data[i] = saved - eps;
            double down = eval();
            value.data[i] = saved;
            double g_fd = (up - down) / (2.0 * eps);
            double ga = g_ad.data[i];
            double rel = std::abs(ga - g_fd) / std::max({1.0, std::abs(ga), std::abs(g_fd)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace gvlm
