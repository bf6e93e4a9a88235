#pragma once

#include <cstdint>
#include <vector>

#include "varblur/types.hpp"

namespace varblur {

/// Per-pixel sharpness: L2 norm of the synthesized kernel. A spread-out
/// kernel has a small norm, a delta has norm 1.
Image blur_map(const KernelBasis& basis, const MixingField& field);

/// Min-max normalizes a sharpness map and flips it into a blur score in
/// [0, 1] (higher = more blurred). Constant maps score 0 everywhere.
Image blur_score_map(const Image& sharpness);

struct ApResult {
    double value = 0.0;
    bool defined = true;  // false when the positive set is empty
};

/// Average precision of `scores` (higher = more likely positive) against a
/// binary mask: the all-points precision-recall curve integrated by steps,
/// tied scores grouped at one threshold.
ApResult average_precision(const Image& scores, const std::vector<std::uint8_t>& positive_mask);

}  // namespace varblur
