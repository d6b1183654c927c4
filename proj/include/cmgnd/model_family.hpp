#ifndef CMGND_MODEL_FAMILY_HPP
#define CMGND_MODEL_FAMILY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cmgnd/constraints.hpp"
#include "cmgnd/ecm.hpp"
#include "cmgnd/errors.hpp"

namespace cmgnd {

struct FamilyPalette {
    bool mu = true;
    bool sigma = true;
    bool nu = true;
};

// Candidate constrained models: every combination of {all components free,
// designated block tied} per palette parameter. The fully tied combination is
// dropped only when the designated block covers all components, where it
// would duplicate a plain tied-everything model that the family already
// orders last. Order: fewer ties first, then mu before sigma before nu.
inline std::vector<ConstraintSpec> enumerate_family(int k, const FamilyPalette& palette = {},
                                                    Block designated = {}) {
    if (k < 2) throw input_error("enumerate_family: K must be >= 2");
    if (designated.empty()) {
        designated.resize(static_cast<std::size_t>(k));
        std::iota(designated.begin(), designated.end(), 0);
    }
    std::sort(designated.begin(), designated.end());
    designated.erase(std::unique(designated.begin(), designated.end()), designated.end());
    for (int idx : designated) {
        if (idx < 0 || idx >= k) {
            throw input_error("enumerate_family: designated block must be within 1..K");
        }
    }
    if (designated.size() < 2) {
        throw input_error("enumerate_family: designated block needs at least two components");
    }
    const bool block_is_full = static_cast<int>(designated.size()) == k;

    struct Combo {
        bool mu, sigma, nu;
    };
    std::vector<Combo> combos;
    for (int bits = 0; bits < 8; ++bits) {
        Combo c{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0};
        if ((c.mu && !palette.mu) || (c.sigma && !palette.sigma) || (c.nu && !palette.nu)) {
            continue;
        }
        if (block_is_full && c.mu && c.sigma && c.nu) continue;
        combos.push_back(c);
    }
    std::stable_sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
        const int pa = int(a.mu) + int(a.sigma) + int(a.nu);
        const int pb = int(b.mu) + int(b.sigma) + int(b.nu);
        if (pa != pb) return pa < pb;
        const int va = 4 * int(a.mu) + 2 * int(a.sigma) + int(a.nu);
        const int vb = 4 * int(b.mu) + 2 * int(b.sigma) + int(b.nu);
        return va > vb;
    });

    std::vector<ConstraintSpec> family;
    family.reserve(combos.size());
    for (const auto& c : combos) {
        ModelCode code{c.mu, c.sigma, c.nu};
        family.push_back(code.to_spec(k, designated));
    }
    return family;
}

namespace detail {

inline std::string partition_text(const Partition& part) {
    std::ostringstream os;
    for (const auto& block : part) {
        os << '{';
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (i) os << ',';
            os << block[i] + 1;
        }
        os << '}';
    }
    return os.str();
}

// 'U' for all singletons, 'C' for exactly one tied block, '?' otherwise.
inline char partition_letter(const Partition& part, int k) {
    std::size_t multi = 0;
    for (const auto& block : part) {
        if (block.size() > 1) ++multi;
    }
    if (multi == 0 && static_cast<int>(part.size()) == k) return 'U';
    if (multi == 1) return 'C';
    return '?';
}

// True when every block of `fine` lies inside some block of `coarse`, i.e.
// `fine` imposes no tie that `coarse` lacks.
inline bool partition_refines(const Partition& fine, const Partition& coarse) {
    for (const auto& fb : fine) {
        bool contained = false;
        for (const auto& cb : coarse) {
            if (std::includes(cb.begin(), cb.end(), fb.begin(), fb.end())) {
                contained = true;
                break;
            }
        }
        if (!contained) return false;
    }
    return true;
}

}  // namespace detail

inline std::string model_label(const ConstraintSpec& spec, int k) {
    const char m = detail::partition_letter(spec.mu_blocks, k);
    const char s = detail::partition_letter(spec.sigma_blocks, k);
    const char n = detail::partition_letter(spec.nu_blocks, k);
    if (m != '?' && s != '?' && n != '?') {
        return std::string{m, s, n};
    }
    return "mu:" + detail::partition_text(spec.mu_blocks) +
           " sigma:" + detail::partition_text(spec.sigma_blocks) +
           " nu:" + detail::partition_text(spec.nu_blocks);
}

// True when `a` ties a subset of what `b` ties for every parameter, so any
// model satisfying `b` also satisfies `a`.
inline bool spec_nested_in(const ConstraintSpec& b, const ConstraintSpec& a) {
    return detail::partition_refines(a.mu_blocks, b.mu_blocks) &&
           detail::partition_refines(a.sigma_blocks, b.sigma_blocks) &&
           detail::partition_refines(a.nu_blocks, b.nu_blocks);
}

struct SelectionEntry {
    ConstraintSpec spec;
    std::string label;
    FitResult fit;
    double bic = std::numeric_limits<double>::infinity();
    int free_parameters = 0;
    int rank = 0;
    bool failed = false;
    std::string error;
};

struct SelectionReport {
    std::vector<SelectionEntry> entries;  // candidate order
    int winner = -1;                      // index into entries, rank 1
    std::vector<std::string> notes;       // local-optimum caveats and the like
};

// Fit every candidate on the same data with the same seeds and rank by BIC.
// Failed fits keep infinite BIC and never win.
inline SelectionReport select_by_bic(const std::vector<double>& data,
                                     const std::vector<ConstraintSpec>& candidates, int k,
                                     const FitConfig& cfg = {}) {
    if (candidates.empty()) {
        throw input_error("select_by_bic: candidate list is empty");
    }
    SelectionReport report;
    report.entries.reserve(candidates.size());
    for (const auto& spec : candidates) {
        SelectionEntry entry;
        entry.spec = spec;
        entry.spec.canonicalize();
        entry.label = model_label(entry.spec, k);
        entry.free_parameters = free_parameter_count(k, entry.spec);
        try {
            entry.fit = ecm_fit(data, k, entry.spec, cfg);
            entry.bic = entry.fit.bic;
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
        }
        report.entries.push_back(std::move(entry));
    }

    std::vector<std::size_t> order(report.entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.entries[a].bic < report.entries[b].bic;
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
        report.entries[order[r]].rank = static_cast<int>(r) + 1;
    }
    const auto& top = report.entries[order.front()];
    if (top.failed) {
        throw fit_error("select_by_bic: all candidates failed");
    }
    report.winner = static_cast<int>(order.front());

    // Multi-start fits can land on local optima; flag nested pairs whose
    // log-likelihoods came out in the impossible order.
    const double slack = 1e-3;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        for (std::size_t j = 0; j < report.entries.size(); ++j) {
            if (i == j) continue;
            const auto& freer = report.entries[i];
            const auto& tied = report.entries[j];
            if (freer.failed || tied.failed) continue;
            if (!spec_nested_in(tied.spec, freer.spec)) continue;
            if (freer.fit.log_lik < tied.fit.log_lik - slack) {
                report.notes.push_back("local optimum: " + freer.label +
                                       " has lower log-likelihood than nested " + tied.label);
            }
        }
    }
    return report;
}

// Plain-text ranking table: label, free parameters, log-likelihood, BIC,
// winner starred.
inline std::string render_selection_table(const SelectionReport& report) {
    std::ostringstream os;
    os << "model            p        log L          BIC  rank\n";
    std::vector<std::size_t> order(report.entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.entries[a].rank < report.entries[b].rank;
    });
    os.setf(std::ios::fixed);
    for (std::size_t idx : order) {
        const auto& e = report.entries[idx];
        os << (static_cast<int>(idx) == report.winner ? "* " : "  ");
        os.width(14);
        os.setf(std::ios::left, std::ios::adjustfield);
        os << e.label;
        os.setf(std::ios::right, std::ios::adjustfield);
        os.width(4);
        os << e.free_parameters;
        if (e.failed) {
            os << "       failed       failed";
        } else {
            os.precision(2);
            os.width(13);
            os << e.fit.log_lik;
            os.width(13);
            os << e.bic;
        }
        os.width(6);
        os << e.rank << '\n';
    }
    for (const auto& note : report.notes) {
        os << "note: " << note << '\n';
    }
    return os.str();
}

}  // namespace cmgnd

#endif  // CMGND_MODEL_FAMILY_HPP
