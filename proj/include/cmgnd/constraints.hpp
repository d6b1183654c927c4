#ifndef CMGND_CONSTRAINTS_HPP
#define CMGND_CONSTRAINTS_HPP

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "cmgnd/errors.hpp"

namespace cmgnd {

using Block = std::vector<int>;
using Partition = std::vector<Block>;

namespace detail {

// Sort members within blocks, then blocks by least member.
inline void canonicalize_partition(Partition& part) {
    for (auto& block : part) {
        std::sort(block.begin(), block.end());
    }
    std::sort(part.begin(), part.end(),
              [](const Block& a, const Block& b) { return a.front() < b.front(); });
}

inline void validate_partition(const Partition& part, int k, const char* name) {
    std::set<int> seen;
    for (const auto& block : part) {
        if (block.empty()) {
            throw input_error(std::string("ConstraintSpec: empty block in ") + name);
        }
        for (int idx : block) {
            if (idx < 0 || idx >= k) {
                throw input_error(std::string("ConstraintSpec: component index out of range in ") +
                                  name);
            }
            if (!seen.insert(idx).second) {
                throw input_error(std::string("ConstraintSpec: blocks overlap in ") + name);
            }
        }
    }
    if (static_cast<int>(seen.size()) != k) {
        throw input_error(std::string("ConstraintSpec: blocks do not cover all components in ") +
                          name);
    }
}

inline Partition singleton_partition(int k) {
    Partition part;
    part.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        part.push_back({i});
    }
    return part;
}

// One designated block, everything else a singleton.
inline Partition block_partition(int k, const Block& designated) {
    Partition part;
    part.push_back(designated);
    for (int i = 0; i < k; ++i) {
        if (std::find(designated.begin(), designated.end(), i) == designated.end()) {
            part.push_back({i});
        }
    }
    canonicalize_partition(part);
    return part;
}

}  // namespace detail

// Three partitions of {0..K-1} (0-based internally; serialized 1-based):
// parameters of one kind are forced equal within each block.
struct ConstraintSpec {
    Partition mu_blocks;
    Partition sigma_blocks;
    Partition nu_blocks;

    static ConstraintSpec singletons(int k) {
        return {detail::singleton_partition(k), detail::singleton_partition(k),
                detail::singleton_partition(k)};
    }

    void canonicalize() {
        detail::canonicalize_partition(mu_blocks);
        detail::canonicalize_partition(sigma_blocks);
        detail::canonicalize_partition(nu_blocks);
    }

    void validate(int k) const {
        detail::validate_partition(mu_blocks, k, "mu_blocks");
        detail::validate_partition(sigma_blocks, k, "sigma_blocks");
        detail::validate_partition(nu_blocks, k, "nu_blocks");
    }

    bool operator==(const ConstraintSpec& other) const = default;
};

// (K-1) weights + one free value per block of each partition.
inline int free_parameter_count(int k, const ConstraintSpec& spec) {
    spec.validate(k);
    return (k - 1) + static_cast<int>(spec.mu_blocks.size()) +
           static_cast<int>(spec.sigma_blocks.size()) +
           static_cast<int>(spec.nu_blocks.size());
}

// Three-letter code over {C, U} giving the (mu, sigma, nu) constraint status:
// U expands to all singletons, C to one designated block plus singletons.
struct ModelCode {
    bool mu_constrained = false;
    bool sigma_constrained = false;
    bool nu_constrained = false;

    static ModelCode parse(const std::string& code) {
        if (code.size() != 3) {
            throw input_error("ModelCode: expected three letters over {C,U}, got '" + code + "'");
        }
        ModelCode mc;
        bool* fields[3] = {&mc.mu_constrained, &mc.sigma_constrained, &mc.nu_constrained};
        for (int i = 0; i < 3; ++i) {
            const char c = code[static_cast<std::size_t>(i)];
            if (c == 'C' || c == 'c') {
                *fields[i] = true;
            } else if (c == 'U' || c == 'u') {
                *fields[i] = false;
            } else {
                throw input_error("ModelCode: invalid letter '" + std::string(1, c) + "' in '" +
                                  code + "'");
            }
        }
        return mc;
    }

    std::string str() const {
        std::string s = "UUU";
        if (mu_constrained) s[0] = 'C';
        if (sigma_constrained) s[1] = 'C';
        if (nu_constrained) s[2] = 'C';
        return s;
    }

    // Expand for K components with the given designated block (0-based).
    ConstraintSpec to_spec(int k, const Block& designated) const {
        if (designated.empty()) {
            throw input_error("ModelCode: designated block must be nonempty");
        }
        for (int idx : designated) {
            if (idx < 0 || idx >= k) {
                throw input_error("ModelCode: designated block index out of range");
            }
        }
        ConstraintSpec spec = ConstraintSpec::singletons(k);
        if (mu_constrained) spec.mu_blocks = detail::block_partition(k, designated);
        if (sigma_constrained) spec.sigma_blocks = detail::block_partition(k, designated);
        if (nu_constrained) spec.nu_blocks = detail::block_partition(k, designated);
        spec.validate(k);
        return spec;
    }

    // K = 2 family of Table-style codes: the designated block is {0, 1}.
    ConstraintSpec to_spec(int k) const {
        Block all(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) all[static_cast<std::size_t>(i)] = i;
        return to_spec(k, all);
    }
};

}  // namespace cmgnd

#endif  // CMGND_CONSTRAINTS_HPP
