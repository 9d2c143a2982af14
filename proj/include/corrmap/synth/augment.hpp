#pragma once

#include "corrmap/data/sample.hpp"

namespace corrmap::synth {

// Training-time augmentations. Spatial recipes apply one nearest-neighbor
// map to rgb / mask / corr / init / instance alike, so correspondence colors
// stay valid vertex codes. hue_shift touches rgb only; correspondence colors
// are labels, never re-colored.
struct AugmentRecipe {
  enum class Kind { identity, upper_crop, multi_person, rotate, hue_shift };
  Kind kind = Kind::identity;
  int k = 2;           // multi_person: number of composited people
  float angle = 0.0f;  // rotate: radians, counterclockwise about the center
  float hue = 0.0f;    // hue_shift: degrees
};

// `others` supplies the k-1 extra samples for multi_person (same size).
// Throws InputError when a crop or rotation empties the mask, or when
// multi_person lacks enough extra samples.
data::Sample augment(const data::Sample& s, const AugmentRecipe& recipe,
                     uint64_t seed,
                     const std::vector<const data::Sample*>& others = {});

}  // namespace corrmap::synth
