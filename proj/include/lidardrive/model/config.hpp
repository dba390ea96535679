#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace lidardrive::model {

/// One convolution block: parallel 'same' convolutions (one per dilation,
/// channels split evenly between them), ReLU, then non-overlapping max pool.
struct EncoderStage {
  int channels = 8;
  int kernel = 3;
  std::vector<int> dilations{1};
  int pool_h = 1;
  int pool_w = 1;
};

struct EncoderConfig {
  int height = 0;
  int width = 0;
  std::vector<EncoderStage> stages;

  /// (channels, height, width) after the last stage.
  std::array<int, 3> output_shape() const;
};

/// Which grid layers feed the encoders.
enum class ChannelMode { kSegDepth, kSeg, kDepth };

const char* channel_mode_name(ChannelMode m);
ChannelMode parse_channel_mode(const std::string& s);

struct ModelConfig {
  EncoderConfig front;
  EncoderConfig bev;
  int fusion_channels = 64;
  int latent_size = 192;
  std::vector<int> mlp_hidden{64, 64};
  int num_commands = 3;
  int waypoint_steps = 3;

  /// Scales applied to route points and wheel speeds in the recurrent input.
  double route_point_scale = 1.0 / 12.0;
  double wheel_speed_scale = 0.15;

  bool use_front = true;
  bool use_bev = true;
  ChannelMode channel_mode = ChannelMode::kSegDepth;
  /// Per-channel standardization of the encoder input (dense path, slower).
  bool standardize_input = false;

  /// The scaled default: both encoders end at 64 x 4 x 8.
  static ModelConfig desk_default();

  int input_channels() const;
  /// Size of the recurrent step input: previous waypoint, two route points,
  /// two wheel speeds.
  static constexpr int kGruInputSize = 8;

  /// Throws std::invalid_argument on inconsistent settings, including
  /// encoders whose outputs differ in shape.
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

}  // namespace lidardrive::model
