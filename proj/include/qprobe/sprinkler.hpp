#pragma once

#include <cstdint>

#include "qprobe/bayesnet.hpp"
#include "qprobe/pipeline.hpp"

namespace qprobe::sprinkler {

// Node order of the fixture network.
inline constexpr Node kSeason = 0;
inline constexpr Node kSprinkler = 1;
inline constexpr Node kRain = 2;
inline constexpr Node kWet = 3;
inline constexpr Node kSlippery = 4;

/// Season -> Sprinkler, Season -> Rain, Sprinkler -> Wet, Rain -> Wet,
/// Wet -> Slippery with fixed CPDs. Season is 0 for winter, 1 for spring.
Cbn network();

/// Raw observations with a four-valued Season column (Winter, Spring, Summer,
/// Autumn). Rows are drawn until `kept_rows` winter or spring rows exist;
/// summer and autumn rows are interleaved and dropped by binarization.
RawDataset raw_observations(std::size_t kept_rows, Rng& rng);

/// Nothing leaves Slippery, nothing enters Season, Sprinkler -> Rain and
/// Season -> Wet forbidden, Sprinkler -> Wet and Rain -> Wet required.
KnowledgeSpec knowledge();

/// The individually named edges of knowledge() reversed; the blanket rules
/// about Slippery and Season are kept.
KnowledgeSpec flipped_knowledge();

/// Binarize Season (Winter -> 0, Spring -> 1), target Sprinkler -> Slippery,
/// probes Sprinkler -> Wet > 0 and Wet -> Slippery > 0.
AnalysisConfig config(bool flip_knowledge);

inline constexpr std::size_t kDemoRows = 10000;

} // namespace qprobe::sprinkler
