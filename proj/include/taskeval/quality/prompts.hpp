#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskeval/core/types.hpp"
#include "taskeval/gateway/endpoint.hpp"
#include "taskeval/gateway/gateway.hpp"

namespace taskeval::quality {

inline constexpr std::size_t kCompletionFrames = 8;
inline constexpr std::size_t kMaxAlignmentViews = 4;
inline constexpr std::string_view kCaptionInstruction = "Describe this scene in detail.";

struct PromptAsset {
  std::string_view name;
  std::string_view text;
  std::string_view sha256;  // of the asset file, recorded at build time
};

/// The three judge system prompts, byte-for-byte as shipped in assets/prompts/.
const PromptAsset& completion_prompt();
const PromptAsset& alignment_direct_prompt();
const PromptAsset& alignment_caption_prompt();

struct Caption {
  std::string camera;
  std::string text;
};

struct AlignmentPromptOptions {
  /// Rewrite "you will receive 4 images" to the actual number of views.
  bool substitute_view_count = false;
};

/// Description text followed by exactly eight frames, in the order given.
gateway::JudgeRequest build_completion_prompt(std::string_view judge_id, std::string_view description,
                                              std::span<const PngImage> frames);

/// Description text followed by one to four scene views, in manifest order.
gateway::JudgeRequest build_alignment_prompt_direct(std::string_view judge_id, std::string_view description,
                                                    std::span<const SceneView> views,
                                                    const AlignmentPromptOptions& options = {});

/// Single text part: the description and an enumerated list of captions.
gateway::JudgeRequest build_alignment_prompt_caption(std::string_view judge_id, std::string_view description,
                                                     std::span<const Caption> captions);

/// One caption per view from a vision-chat captioner. All-or-nothing: any failure
/// raises and no captions are returned.
std::vector<Caption> caption_views(gateway::ModelGateway& gateway, std::span<const SceneView> views,
                                   std::string_view captioner_id);

}  // namespace taskeval::quality
