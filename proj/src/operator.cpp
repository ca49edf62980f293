#include "anop/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anop/error.hpp"

namespace anop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------- DiagonalSeq

DiagonalSeq::DiagonalSeq() : tail_(make_const(Scalar(0))) {}

DiagonalSeq::DiagonalSeq(const Scalar& constant) : tail_(make_const(constant)) {}

DiagonalSeq::DiagonalSeq(std::vector<Scalar> prefix, RulePtr tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail))
{
    if (prefix_.size() < tail_->valid_from()) {
        throw std::logic_error("DiagonalSeq: prefix shorter than the tail's domain");
    }
    canonicalize();
}

void DiagonalSeq::canonicalize()
{
    const std::size_t floor = tail_->valid_from();
    while (prefix_.size() > floor && prefix_.back() == tail_->at(prefix_.size() - 1)) {
        prefix_.pop_back();
    }
}

Scalar DiagonalSeq::entry(std::size_t i) const
{
    return i < prefix_.size() ? prefix_[i] : tail_->at(i);
}

bool DiagonalSeq::exact() const
{
    if (!tail_->is_const() || !tail_->limit().exact()) return false;
    return std::all_of(prefix_.begin(), prefix_.end(), [](const Scalar& s) { return s.exact(); });
}

bool DiagonalSeq::is_zero() const
{
    return prefix_.empty() && tail_->is_const() && tail_->limit().is_zero();
}

double DiagonalSeq::sup_bound() const
{
    return sup_bound_from(0);
}

double DiagonalSeq::sup_bound_from(std::size_t from) const
{
    double s = 0.0;
    for (std::size_t i = from; i < prefix_.size(); ++i) s = std::max(s, prefix_[i].abs_upper());
    const auto d = tail_->decay();
    if (!d) return kInf;
    const double start = static_cast<double>(std::max(from, prefix_.size()));
    const double excess = d->C == 0.0 ? 0.0 : d->C * std::pow(start + 1.0, -d->p);
    return std::max(s, tail_->limit().abs_upper() + excess);
}

DiagonalSeq DiagonalSeq::conj() const
{
    std::vector<Scalar> p;
    p.reserve(prefix_.size());
    for (const auto& v : prefix_) p.push_back(v.conj());
    return DiagonalSeq(std::move(p), make_conj(tail_));
}

DiagonalSeq DiagonalSeq::scaled(const Scalar& s) const
{
    std::vector<Scalar> p;
    p.reserve(prefix_.size());
    for (const auto& v : prefix_) p.push_back(v * s);
    return DiagonalSeq(std::move(p), make_scale(tail_, s));
}

DiagonalSeq DiagonalSeq::with_added(std::size_t i, const Scalar& v) const
{
    std::vector<Scalar> p = prefix_;
    while (p.size() <= i) p.push_back(tail_->at(p.size()));
    p[i] += v;
    return DiagonalSeq(std::move(p), tail_);
}

DiagonalSeq operator+(const DiagonalSeq& a, const DiagonalSeq& b)
{
    const std::size_t n = std::max(a.prefix_.size(), b.prefix_.size());
    std::vector<Scalar> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = a.entry(i) + b.entry(i);
    return DiagonalSeq(std::move(p), make_sum({a.tail_, b.tail_}));
}

bool operator==(const DiagonalSeq& a, const DiagonalSeq& b)
{
    return a.prefix_ == b.prefix_ && same_rule(a.tail_, b.tail_);
}

// ---------------------------------------------------------------- BandedBlock

Scalar BandedBlock::entry(std::size_t r, std::size_t c) const
{
    const long j = static_cast<long>(r) - static_cast<long>(c);
    const auto it = diagonals.find(j);
    if (it == diagonals.end()) return Scalar(0);
    return it->second.entry(std::min(r, c));
}

std::size_t BandedBlock::bandwidth() const
{
    std::size_t w = 0;
    for (const auto& [j, d] : diagonals) w = std::max<std::size_t>(w, static_cast<std::size_t>(std::labs(j)));
    return w;
}

std::size_t BandedBlock::corner() const
{
    std::size_t c = 0;
    for (const auto& [j, d] : diagonals) {
        c = std::max(c, d.prefix().size() + static_cast<std::size_t>(std::labs(j)));
    }
    return c;
}

void BandedBlock::add(long offset, const DiagonalSeq& d)
{
    auto it = diagonals.find(offset);
    if (it == diagonals.end()) {
        if (!d.is_zero()) diagonals.emplace(offset, d);
        return;
    }
    it->second = it->second + d;
    if (it->second.is_zero()) diagonals.erase(it);
}

namespace {

BandedBlock banded_product(const BandedBlock& a, const BandedBlock& b)
{
    BandedBlock out;
    if (a.empty() || b.empty()) return out;
    std::size_t pa = 0, pb = 0;
    for (const auto& [j, d] : a.diagonals) pa = std::max(pa, d.prefix().size());
    for (const auto& [j, d] : b.diagonals) pb = std::max(pb, d.prefix().size());
    const std::size_t len = std::max(pa, pb) + a.bandwidth() + b.bandwidth();

    std::map<long, std::vector<RulePtr>> tails;
    for (const auto& [j1, da] : a.diagonals) {
        for (const auto& [j2, db] : b.diagonals) {
            const long d = j1 + j2;
            const long row_off = std::max(d, 0L);
            const long col_off = std::max(-d, 0L);
            const long mid_off = row_off - j1;
            tails[d].push_back(make_product(make_shift(da.tail(), std::min(row_off, mid_off)),
                                            make_shift(db.tail(), std::min(mid_off, col_off))));
        }
    }
    for (auto& [d, terms] : tails) {
        const long row_off = std::max(d, 0L);
        const long col_off = std::max(-d, 0L);
        std::vector<Scalar> prefix(len);
        for (std::size_t i = 0; i < len; ++i) {
            const long r = static_cast<long>(i) + row_off;
            const long c = static_cast<long>(i) + col_off;
            Scalar s;
            for (const auto& [j1, da] : a.diagonals) {
                const auto it = b.diagonals.find(d - j1);
                if (it == b.diagonals.end()) continue;
                const long k = r - j1;
                if (k < 0) continue;
                const Scalar x = da.entry(static_cast<std::size_t>(std::min(r, k)));
                if (x.is_zero()) continue;
                s += x * it->second.entry(static_cast<std::size_t>(std::min(k, c)));
            }
            prefix[i] = s;
        }
        DiagonalSeq seq(std::move(prefix), make_sum(std::move(terms)));
        if (!seq.is_zero()) out.diagonals.emplace(d, std::move(seq));
    }
    return out;
}

void add_sparse(SparseEntries& s, std::size_t r, std::size_t c, const Scalar& v)
{
    if (v.is_zero()) return;
    auto [it, inserted] = s.emplace(std::make_pair(r, c), v);
    if (!inserted) {
        it->second += v;
        if (it->second.is_zero()) s.erase(it);
    }
}

} // namespace

// ---------------------------------------------------------------- VectorExpr

VectorExpr VectorExpr::basis(std::size_t components, std::size_t comp, std::size_t index)
{
    VectorExpr v(components);
    v.parts[comp][index] = Scalar(1);
    return v;
}

void VectorExpr::set(std::size_t comp, std::size_t index, const Scalar& v)
{
    if (v.is_zero()) {
        parts[comp].erase(index);
    } else {
        parts[comp][index] = v;
    }
}

Scalar VectorExpr::get(std::size_t comp, std::size_t index) const
{
    const auto it = parts[comp].find(index);
    return it == parts[comp].end() ? Scalar(0) : it->second;
}

bool VectorExpr::exact() const
{
    for (const auto& p : parts) {
        for (const auto& [i, v] : p) {
            if (!v.exact()) return false;
        }
    }
    return true;
}

bool VectorExpr::is_zero() const
{
    for (const auto& p : parts) {
        for (const auto& [i, v] : p) {
            if (!v.is_zero()) return false;
        }
    }
    return true;
}

void VectorExpr::prune()
{
    for (auto& p : parts) {
        for (auto it = p.begin(); it != p.end();) {
            it = it->second.is_zero() ? p.erase(it) : std::next(it);
        }
    }
}

VectorExpr VectorExpr::scaled(const Scalar& s) const
{
    VectorExpr out = *this;
    for (auto& p : out.parts) {
        for (auto& [i, v] : p) v *= s;
    }
    out.prune();
    return out;
}

VectorExpr operator+(const VectorExpr& a, const VectorExpr& b)
{
    if (a.parts.size() != b.parts.size()) throw Error(ErrorCode::ShapeMismatch, "vector component counts differ");
    VectorExpr out = a;
    for (std::size_t c = 0; c < b.parts.size(); ++c) {
        for (const auto& [i, v] : b.parts[c]) out.parts[c][i] += v;
    }
    out.prune();
    return out;
}

VectorExpr operator-(const VectorExpr& a, const VectorExpr& b)
{
    return a + b.scaled(Scalar(-1));
}

bool operator==(const VectorExpr& a, const VectorExpr& b)
{
    VectorExpr x = a, y = b;
    x.prune();
    y.prune();
    return x.parts == y.parts;
}

Scalar inner(const VectorExpr& x, const VectorExpr& y)
{
    Scalar s;
    for (std::size_t c = 0; c < x.parts.size() && c < y.parts.size(); ++c) {
        for (const auto& [i, v] : x.parts[c]) {
            const auto it = y.parts[c].find(i);
            if (it != y.parts[c].end()) s += v * it->second.conj();
        }
    }
    return s;
}

Scalar norm2(const VectorExpr& x)
{
    return inner(x, x);
}

// ---------------------------------------------------------------- OperatorExpr

OperatorExpr::OperatorExpr(std::vector<Space> spaces)
    : spaces_(std::move(spaces)), blocks_(spaces_.size() * spaces_.size())
{
    for (const auto& s : spaces_) {
        if (!s.is_l2() && s.dim == 0) throw Error(ErrorCode::BadParams, "finite component of dimension 0");
    }
}

void OperatorExpr::check_index(std::size_t bi, std::size_t r) const
{
    if (bi >= spaces_.size()) throw Error(ErrorCode::ShapeMismatch, "component index out of range");
    if (!spaces_[bi].is_l2() && r >= spaces_[bi].dim) {
        throw Error(ErrorCode::ShapeMismatch, "coordinate " + std::to_string(r) + " outside finite component of dimension " +
                                                  std::to_string(spaces_[bi].dim));
    }
}

void OperatorExpr::set_banded(std::size_t i, BandedBlock b)
{
    check_index(i, 0);
    if (!spaces_[i].is_l2()) throw Error(ErrorCode::ShapeMismatch, "banded block on a finite component");
    for (auto it = b.diagonals.begin(); it != b.diagonals.end();) {
        it = it->second.is_zero() ? b.diagonals.erase(it) : std::next(it);
    }
    block_mut(i, i).banded = std::move(b);
}

void OperatorExpr::add_diagonal(std::size_t i, long offset, const DiagonalSeq& d)
{
    check_index(i, 0);
    if (!spaces_[i].is_l2()) throw Error(ErrorCode::ShapeMismatch, "banded block on a finite component");
    block_mut(i, i).banded.add(offset, d);
}

void OperatorExpr::add_entry(std::size_t bi, std::size_t bj, std::size_t r, std::size_t c, const Scalar& v)
{
    check_index(bi, r);
    check_index(bj, c);
    if (v.is_zero()) return;
    Block& b = block_mut(bi, bj);
    if (bi == bj && spaces_[bi].is_l2()) {
        const long off = static_cast<long>(r) - static_cast<long>(c);
        auto it = b.banded.diagonals.find(off);
        DiagonalSeq d = it == b.banded.diagonals.end() ? DiagonalSeq() : it->second;
        d = d.with_added(std::min(r, c), v);
        if (d.is_zero()) {
            b.banded.diagonals.erase(off);
        } else {
            b.banded.diagonals.insert_or_assign(off, std::move(d));
        }
        return;
    }
    add_sparse(b.sparse, r, c, v);
}

Scalar OperatorExpr::entry(std::size_t bi, std::size_t r, std::size_t bj, std::size_t c) const
{
    const Block& b = block(bi, bj);
    Scalar s = b.banded.empty() ? Scalar(0) : b.banded.entry(r, c);
    const auto it = b.sparse.find({r, c});
    if (it != b.sparse.end()) s += it->second;
    return s;
}

void OperatorExpr::canonicalize()
{
    const std::size_t n = spaces_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Block& b = block_mut(i, j);
            for (auto it = b.sparse.begin(); it != b.sparse.end();) {
                it = it->second.is_zero() ? b.sparse.erase(it) : std::next(it);
            }
            if (i == j && spaces_[i].is_l2() && !b.sparse.empty()) {
                SparseEntries moved;
                moved.swap(b.sparse);
                for (const auto& [rc, v] : moved) add_entry(i, j, rc.first, rc.second, v);
            }
            for (auto it = b.banded.diagonals.begin(); it != b.banded.diagonals.end();) {
                it = it->second.is_zero() ? b.banded.diagonals.erase(it) : std::next(it);
            }
        }
    }
}

bool OperatorExpr::exact() const
{
    for (const auto& b : blocks_) {
        for (const auto& [j, d] : b.banded.diagonals) {
            if (!d.exact()) return false;
        }
        for (const auto& [rc, v] : b.sparse) {
            if (!v.exact()) return false;
        }
    }
    return true;
}

bool OperatorExpr::asymptotic() const
{
    for (const auto& b : blocks_) {
        for (const auto& [j, d] : b.banded.diagonals) {
            if (d.asymptotic()) return true;
        }
    }
    return false;
}

std::size_t OperatorExpr::bandwidth() const
{
    std::size_t w = 0;
    for (const auto& b : blocks_) w = std::max(w, b.banded.bandwidth());
    return w;
}

std::vector<std::size_t> OperatorExpr::corners() const
{
    const std::size_t n = spaces_.size();
    std::vector<std::size_t> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!spaces_[i].is_l2()) out[i] = spaces_[i].dim;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Block& b = block(i, j);
            if (spaces_[i].is_l2() && i == j) out[i] = std::max(out[i], b.banded.corner());
            for (const auto& [rc, v] : b.sparse) {
                if (spaces_[i].is_l2()) out[i] = std::max(out[i], rc.first + 1);
                if (spaces_[j].is_l2()) out[j] = std::max(out[j], rc.second + 1);
            }
        }
    }
    return out;
}

OperatorExpr combine(const std::vector<std::pair<Scalar, OperatorExpr>>& terms)
{
    if (terms.empty()) return OperatorExpr();
    OperatorExpr out(terms.front().second.spaces());
    const std::size_t n = out.components();
    for (const auto& [coef, op] : terms) {
        if (!(op.spaces() == out.spaces())) throw Error(ErrorCode::ShapeMismatch, "combine: space lists differ");
        if (coef.is_zero()) continue;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const Block& b = op.block(i, j);
                Block& o = out.block_mut(i, j);
                for (const auto& [off, d] : b.banded.diagonals) o.banded.add(off, d.scaled(coef));
                for (const auto& [rc, v] : b.sparse) add_sparse(o.sparse, rc.first, rc.second, coef * v);
            }
        }
    }
    out.canonicalize();
    return out;
}

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b)
{
    if (!(a.spaces() == b.spaces())) throw Error(ErrorCode::ShapeMismatch, "multiply: space lists differ");
    OperatorExpr out(a.spaces());
    const std::size_t n = a.components();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Block& o = out.block_mut(i, j);
            for (std::size_t m = 0; m < n; ++m) {
                const Block& x = a.block(i, m);
                const Block& y = b.block(m, j);
                if (x.empty() || y.empty()) continue;
                if (!x.banded.empty() && !y.banded.empty()) {
                    for (const auto& [off, d] : banded_product(x.banded, y.banded).diagonals) o.banded.add(off, d);
                }
                for (const auto& [kc, v] : y.sparse) {
                    for (const auto& [off, d] : x.banded.diagonals) {
                        const long r = static_cast<long>(kc.first) + off;
                        if (r < 0) continue;
                        const auto ru = static_cast<std::size_t>(r);
                        add_sparse(o.sparse, ru, kc.second, d.entry(std::min(ru, kc.first)) * v);
                    }
                }
                for (const auto& [rk, v] : x.sparse) {
                    for (const auto& [off, d] : y.banded.diagonals) {
                        const long c = static_cast<long>(rk.second) - off;
                        if (c < 0) continue;
                        const auto cu = static_cast<std::size_t>(c);
                        add_sparse(o.sparse, rk.first, cu, v * d.entry(std::min(rk.second, cu)));
                    }
                }
                if (!x.sparse.empty() && !y.sparse.empty()) {
                    for (const auto& [rk, v] : x.sparse) {
                        auto it = y.sparse.lower_bound({rk.second, 0});
                        for (; it != y.sparse.end() && it->first.first == rk.second; ++it) {
                            add_sparse(o.sparse, rk.first, it->first.second, v * it->second);
                        }
                    }
                }
            }
        }
    }
    out.canonicalize();
    return out;
}

OperatorExpr adjoint(const OperatorExpr& a)
{
    OperatorExpr out(a.spaces());
    const std::size_t n = a.components();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Block& b = a.block(i, j);
            Block& o = out.block_mut(j, i);
            for (const auto& [off, d] : b.banded.diagonals) o.banded.diagonals.emplace(-off, d.conj());
            for (const auto& [rc, v] : b.sparse) o.sparse.emplace(std::make_pair(rc.second, rc.first), v.conj());
        }
    }
    return out;
}

VectorExpr apply(const OperatorExpr& a, const VectorExpr& x)
{
    const std::size_t n = a.components();
    if (x.parts.size() != n) throw Error(ErrorCode::ShapeMismatch, "apply: vector has wrong component count");
    for (std::size_t c = 0; c < n; ++c) {
        const Space& s = a.spaces()[c];
        if (!s.is_l2() && !x.parts[c].empty() && x.parts[c].rbegin()->first >= s.dim) {
            throw Error(ErrorCode::ShapeMismatch, "apply: coordinate outside finite component");
        }
    }
    VectorExpr y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Block& b = a.block(i, j);
            if (b.empty() || x.parts[j].empty()) continue;
            for (const auto& [k, v] : x.parts[j]) {
                for (const auto& [off, d] : b.banded.diagonals) {
                    const long r = static_cast<long>(k) + off;
                    if (r < 0) continue;
                    const auto ru = static_cast<std::size_t>(r);
                    const Scalar e = d.entry(std::min(ru, k));
                    if (!e.is_zero()) y.parts[i][ru] += e * v;
                }
            }
            for (const auto& [rc, v] : b.sparse) {
                const auto it = x.parts[j].find(rc.second);
                if (it != x.parts[j].end()) y.parts[i][rc.first] += v * it->second;
            }
        }
    }
    y.prune();
    return y;
}

OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b)
{
    return combine({{Scalar(1), a}, {Scalar(1), b}});
}

OperatorExpr operator-(const OperatorExpr& a, const OperatorExpr& b)
{
    return combine({{Scalar(1), a}, {Scalar(-1), b}});
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b)
{
    return multiply(a, b);
}

OperatorExpr scaled(const OperatorExpr& a, const Scalar& s)
{
    return combine({{s, a}});
}

OperatorExpr zero_operator(std::vector<Space> spaces)
{
    return OperatorExpr(std::move(spaces));
}

OperatorExpr identity_operator(std::vector<Space> spaces)
{
    OperatorExpr out(std::move(spaces));
    for (std::size_t i = 0; i < out.components(); ++i) {
        const Space& s = out.spaces()[i];
        if (s.is_l2()) {
            out.add_diagonal(i, 0, DiagonalSeq(Scalar(1)));
        } else {
            for (std::size_t k = 0; k < s.dim; ++k) out.add_entry(i, i, k, k, Scalar(1));
        }
    }
    return out;
}

OperatorExpr right_shift()
{
    OperatorExpr out({Space::l2()});
    out.add_diagonal(0, 1, DiagonalSeq(Scalar(1)));
    return out;
}

OperatorExpr diagonal_operator(std::vector<Scalar> entries, const Scalar& limit)
{
    OperatorExpr out({Space::l2()});
    out.add_diagonal(0, 0, DiagonalSeq(std::move(entries), make_const(limit)));
    return out;
}

OperatorExpr finite_operator(const Matrix& m)
{
    if (m.rows() != m.cols() || m.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "finite operator needs a square matrix");
    OperatorExpr out({Space::finite(m.rows())});
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out.add_entry(0, 0, r, c, m(r, c));
    }
    return out;
}

OperatorExpr direct_sum(const OperatorExpr& a, const OperatorExpr& b)
{
    std::vector<Space> spaces = a.spaces();
    spaces.insert(spaces.end(), b.spaces().begin(), b.spaces().end());
    OperatorExpr out(spaces);
    const std::size_t na = a.components();
    auto copy = [&](const OperatorExpr& src, std::size_t base) {
        for (std::size_t i = 0; i < src.components(); ++i) {
            for (std::size_t j = 0; j < src.components(); ++j) {
                const Block& blk = src.block(i, j);
                for (const auto& [off, d] : blk.banded.diagonals) out.add_diagonal(base + i, off, d);
                for (const auto& [rc, v] : blk.sparse) out.add_entry(base + i, base + j, rc.first, rc.second, v);
            }
        }
    };
    copy(a, 0);
    copy(b, na);
    return out;
}

// ---------------------------------------------------------------- truncation

Layout Layout::make(const std::vector<Space>& spaces, std::size_t n)
{
    return make(spaces, std::vector<std::size_t>(spaces.size(), n));
}

Layout Layout::make(const std::vector<Space>& spaces, const std::vector<std::size_t>& ext)
{
    Layout l;
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        const std::size_t sz = spaces[i].is_l2() ? ext[i] : spaces[i].dim;
        l.offsets.push_back(l.total);
        l.sizes.push_back(sz);
        l.total += sz;
    }
    return l;
}

std::vector<Scalar> Layout::flatten(const VectorExpr& x) const
{
    std::vector<Scalar> v(total);
    for (std::size_t c = 0; c < x.parts.size(); ++c) {
        for (const auto& [i, s] : x.parts[c]) {
            if (s.is_zero()) continue;
            if (i >= sizes[c]) throw Error(ErrorCode::ShapeMismatch, "vector support exceeds the truncation region");
            v[offsets[c] + i] = s;
        }
    }
    return v;
}

VectorExpr Layout::unflatten(const std::vector<Scalar>& v) const
{
    VectorExpr x(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i) x.set(c, i, v[offsets[c] + i]);
    }
    return x;
}

VectorExpr Layout::unflatten(const CVec& v) const
{
    VectorExpr x(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i) {
            const Complex z = v[offsets[c] + i];
            if (z != Complex(0.0)) x.set(c, i, Scalar::floating(z));
        }
    }
    return x;
}

std::pair<std::size_t, std::size_t> Layout::locate(std::size_t flat) const
{
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (flat < offsets[c] + sizes[c]) return {c, flat - offsets[c]};
    }
    throw std::out_of_range("Layout::locate");
}

Truncation compress(const OperatorExpr& a, const Layout& layout)
{
    Truncation t;
    t.layout = layout;
    t.matrix = Matrix(layout.total, layout.total);
    const std::size_t n = a.components();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Block& b = a.block(i, j);
            const std::size_t ni = layout.sizes[i], nj = layout.sizes[j];
            for (const auto& [off, d] : b.banded.diagonals) {
                for (std::size_t c = 0; c < nj; ++c) {
                    const long r = static_cast<long>(c) + off;
                    if (r < 0 || static_cast<std::size_t>(r) >= ni) continue;
                    const auto ru = static_cast<std::size_t>(r);
                    t.matrix(layout.offsets[i] + ru, layout.offsets[j] + c) = d.entry(std::min(ru, c));
                }
                // Entries coupling the section with its complement sit at
                // indices [n - |off|, n) of this diagonal.
                if (off != 0) {
                    const std::size_t w = static_cast<std::size_t>(std::labs(off));
                    double s = 0.0;
                    for (std::size_t k = ni > w ? ni - w : 0; k < ni; ++k) s = std::max(s, d.entry(k).abs_upper());
                    t.tail_bound += s;
                }
            }
            for (const auto& [rc, v] : b.sparse) {
                const bool rin = rc.first < ni, cin = rc.second < nj;
                if (rin && cin) {
                    t.matrix(layout.offsets[i] + rc.first, layout.offsets[j] + rc.second) += v;
                } else if (rin != cin) {
                    t.tail_bound += v.abs_upper();
                }
            }
        }
    }
    return t;
}

Truncation truncate(const OperatorExpr& a, std::size_t n)
{
    if (n == 0) throw Error(ErrorCode::BadParams, "truncation size must be positive");
    if (n < a.bandwidth()) {
        throw Error(ErrorCode::NSmallerThanBand,
                    "n = " + std::to_string(n) + " is below the bandwidth " + std::to_string(a.bandwidth()));
    }
    return compress(a, Layout::make(a.spaces(), n));
}

} // namespace anop
