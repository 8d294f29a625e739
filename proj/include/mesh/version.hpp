#pragma once

namespace mesh {

inline constexpr const char* kToolName = "mesh";
inline constexpr const char* kToolVersion = "0.1.0";

// Version tag of the dataset meta-feature layout. Meta-dataset files and
// bundle files both carry it so they cannot silently disagree.
inline constexpr const char* kFeatureSetVersion = "dmf15-v1";

}  // namespace mesh
