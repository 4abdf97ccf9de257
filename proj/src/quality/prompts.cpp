#include "taskeval/quality/prompts.hpp"

#include <taskeval/prompt_assets.hpp>

#include "taskeval/quality/scoring.hpp"

namespace taskeval::quality {

using gateway::ImagePart;
using gateway::JudgeRequest;
using gateway::TextPart;

const PromptAsset& completion_prompt() {
  static const PromptAsset asset{"completion", assets::kCompletion, assets::kCompletionSha256};
  return asset;
}

const PromptAsset& alignment_direct_prompt() {
  static const PromptAsset asset{"alignment_direct", assets::kAlignmentDirect, assets::kAlignmentDirectSha256};
  return asset;
}

const PromptAsset& alignment_caption_prompt() {
  static const PromptAsset asset{"alignment_caption", assets::kAlignmentCaption, assets::kAlignmentCaptionSha256};
  return asset;
}

JudgeRequest build_completion_prompt(std::string_view judge_id, std::string_view description,
                                     std::span<const PngImage> frames) {
  if (frames.size() != kCompletionFrames) {
    throw QualityError("completion prompt needs exactly " + std::to_string(kCompletionFrames) + " frames, got " +
                       std::to_string(frames.size()));
  }
  JudgeRequest request;
  request.endpoint_id = judge_id;
  request.system = completion_prompt().text;
  request.parts.emplace_back(TextPart{std::string(description)});
  for (const auto& frame : frames) request.parts.emplace_back(ImagePart{frame});
  return request;
}

JudgeRequest build_alignment_prompt_direct(std::string_view judge_id, std::string_view description,
                                           std::span<const SceneView> views, const AlignmentPromptOptions& options) {
  if (views.empty()) throw QualityError("direct alignment prompt needs at least one scene view");
  if (views.size() > kMaxAlignmentViews) {
    throw QualityError("direct alignment prompt takes at most " + std::to_string(kMaxAlignmentViews) + " views, got " +
                       std::to_string(views.size()));
  }
  JudgeRequest request;
  request.endpoint_id = judge_id;
  request.system = alignment_direct_prompt().text;
  if (options.substitute_view_count) {
    static constexpr std::string_view kStock = "you will receive 4 images";
    const auto at = request.system.find(kStock);
    if (at != std::string::npos) {
      const std::string actual = "you will receive " + std::to_string(views.size()) +
                                 (views.size() == 1 ? " image" : " images");
      request.system.replace(at, kStock.size(), actual);
    }
  }
  request.parts.emplace_back(TextPart{std::string(description)});
  for (const auto& view : views) request.parts.emplace_back(ImagePart{view.image});
  return request;
}

JudgeRequest build_alignment_prompt_caption(std::string_view judge_id, std::string_view description,
                                            std::span<const Caption> captions) {
  if (captions.empty()) throw QualityError("caption alignment prompt needs at least one caption");
  std::string text = "Task description: ";
  text += description;
  text += "\n\nScene captions:\n";
  for (std::size_t i = 0; i < captions.size(); ++i) {
    text += std::to_string(i + 1) + ". [" + captions[i].camera + "] " + captions[i].text + "\n";
  }
  JudgeRequest request;
  request.endpoint_id = judge_id;
  request.system = alignment_caption_prompt().text;
  request.parts.emplace_back(TextPart{std::move(text)});
  return request;
}

std::vector<Caption> caption_views(gateway::ModelGateway& gateway, std::span<const SceneView> views,
                                   std::string_view captioner_id) {
  if (views.empty()) throw QualityError("caption_views: no scene views");
  if (gateway.endpoint(captioner_id).kind != gateway::EndpointKind::vision_chat) {
    throw QualityError("captioner " + std::string(captioner_id) + " is not a vision-chat endpoint");
  }
  std::vector<Caption> captions;
  captions.reserve(views.size());
  for (const auto& view : views) {
    JudgeRequest request;
    request.endpoint_id = captioner_id;
    request.parts.emplace_back(TextPart{std::string(kCaptionInstruction)});
    request.parts.emplace_back(ImagePart{view.image});
    try {
      captions.push_back({view.camera, gateway.complete(request, "caption").raw});
    } catch (const std::exception& e) {
      throw QualityError("captioning view '" + view.camera + "' failed: " + e.what());
    }
  }
  return captions;
}

}  // namespace taskeval::quality
