#include "hieract/pathway.hpp"

#include "hieract/error.hpp"

namespace hieract {

struct BlockCache {
  ops::Conv3dCache a, b, c, shortcut;
  std::vector<std::uint8_t> mask_a, mask_b, mask_out;
};

struct PathwayCache {
  ops::Conv3dCache stem;
  std::vector<std::uint8_t> stem_mask;
  ops::MaxPool3dCache pool;
  std::vector<BlockCache> blocks;
  ops::Conv3dCache projection;
  std::vector<std::uint8_t> projection_mask;
  Shape pooled_shape;
};

std::string_view depth_preset_name(DepthPreset preset) {
  return preset == DepthPreset::kTiny ? "tiny" : "paper_resnet50";
}

DepthPreset parse_depth_preset(std::string_view text) {
  if (text == "tiny") return DepthPreset::kTiny;
  if (text == "paper_resnet50") return DepthPreset::kPaperResnet50;
  fail(ErrorCategory::kInvalidArgument, "unknown depth preset '" + std::string(text) + "'");
}

void PathwayConfig::validate() const {
  require(num_frames >= 1, ErrorCategory::kInvalidArgument, "pathway: num_frames must be >= 1");
  require(spatial_size >= 1, ErrorCategory::kInvalidArgument, "pathway: spatial_size must be >= 1");
  require(base_channels >= 1, ErrorCategory::kInvalidArgument, "pathway: base_channels must be >= 1");
  require(feature_dim >= 1, ErrorCategory::kInvalidArgument, "pathway: feature_dim must be >= 1");
  require(first_kernel[0] >= 1 && first_kernel[1] >= 1 && first_kernel[2] >= 1,
          ErrorCategory::kInvalidArgument, "pathway: first_kernel extents must be >= 1");
  require(temporal_stride >= 1, ErrorCategory::kInvalidArgument, "pathway: temporal_stride must be >= 1");
  require(preset != DepthPreset::kTiny || tiny_stages >= 1, ErrorCategory::kInvalidArgument,
          "pathway: tiny preset needs at least one stage");
}

PathwayConfig PathwayConfig::paper_resnet50(int num_frames, int spatial_size) {
  PathwayConfig c;
  c.num_frames = num_frames;
  c.spatial_size = spatial_size;
  c.base_channels = 64;
  c.feature_dim = 2048;
  c.first_kernel = {1, 7, 7};
  c.preset = DepthPreset::kPaperResnet50;
  c.temporal_stride = 1;
  return c;
}

PathwayConfig PathwayConfig::tiny(int num_frames, int spatial_size, int base_channels,
                                  int feature_dim, int stages) {
  PathwayConfig c;
  c.num_frames = num_frames;
  c.spatial_size = spatial_size;
  c.base_channels = base_channels;
  c.feature_dim = feature_dim;
  c.first_kernel = {1, 7, 7};
  c.preset = DepthPreset::kTiny;
  c.temporal_stride = 2;
  c.tiny_stages = stages;
  return c;
}

Pathway::Pathway(const PathwayConfig& config, Level level, std::uint64_t init_seed)
    : config_(config), level_(level) {
  config_.validate();
  build(init_seed);
}

Pathway::~Pathway() = default;
Pathway::Pathway(Pathway&&) noexcept = default;
Pathway& Pathway::operator=(Pathway&&) noexcept = default;

void Pathway::build(std::uint64_t init_seed) {
  Rng rng(init_seed);
  const auto& k = config_.first_kernel;
  ops::Conv3dGeometry stem{3, config_.base_channels, k, {1, 2, 2}, {k[0] / 2, k[1] / 2, k[2] / 2}};
  stem_ = ConvLayer::create(params_, "pathway/stem", stem, rng);

  struct StageSpec {
    int width;
    int out;
    int blocks;
    int kt;
    int spatial_stride;
    int temporal_stride;
  };
  std::vector<StageSpec> stages;
  const bool bottleneck = config_.preset == DepthPreset::kPaperResnet50;
  if (bottleneck) {
    stem_pool_ = ops::MaxPool3dGeometry{};
    const int c = config_.base_channels;
    stages = {{c, 4 * c, 3, 1, 1, 1},
              {2 * c, 8 * c, 4, 1, 2, 1},
              {4 * c, 16 * c, 6, 3, 2, 1},
              {8 * c, 32 * c, 3, 3, 2, config_.temporal_stride}};
  } else {
    int width = config_.base_channels;
    for (int i = 0; i < config_.tiny_stages; ++i) {
      width *= 2;
      const bool last = i + 1 == config_.tiny_stages;
      stages.push_back({width, width, 1, 3, 2, last ? config_.temporal_stride : 1});
    }
  }

  int channels = config_.base_channels;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    for (int b = 0; b < st.blocks; ++b) {
      const std::string name = "pathway/stage" + std::to_string(s + 1) + "/block" + std::to_string(b);
      const int ss = b == 0 ? st.spatial_stride : 1;
      const int ts = b == 0 ? st.temporal_stride : 1;
      const int pt = st.kt / 2;
      Block block;
      if (bottleneck) {
        block.a = ConvLayer::create(params_, name + "/conv_a",
                                    {channels, st.width, {st.kt, 1, 1}, {ts, 1, 1}, {pt, 0, 0}}, rng);
        block.b = ConvLayer::create(params_, name + "/conv_b",
                                    {st.width, st.width, {1, 3, 3}, {1, ss, ss}, {0, 1, 1}}, rng);
        block.c = ConvLayer::create(params_, name + "/conv_c",
                                    {st.width, st.out, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}}, rng);
      } else {
        block.a = ConvLayer::create(params_, name + "/conv_a",
                                    {channels, st.out, {st.kt, 3, 3}, {ts, ss, ss}, {pt, 1, 1}}, rng);
        block.b = ConvLayer::create(params_, name + "/conv_b",
                                    {st.out, st.out, {st.kt, 3, 3}, {1, 1, 1}, {pt, 1, 1}}, rng);
      }
      if (channels != st.out || ss != 1 || ts != 1) {
        block.shortcut = ConvLayer::create(params_, name + "/shortcut",
                                           {channels, st.out, {1, 1, 1}, {ts, ss, ss}, {0, 0, 0}}, rng);
      }
      blocks_.push_back(std::move(block));
      channels = st.out;
    }
  }
  if (channels != config_.feature_dim) {
    projection_ = ConvLayer::create(params_, "pathway/projection",
                                    {channels, config_.feature_dim, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}}, rng);
  }
}

void PathwayCacheDeleter::operator()(PathwayCache* cache) const { delete cache; }

PathwayCachePtr Pathway::make_cache() const { return PathwayCachePtr(new PathwayCache()); }

Tensor clip_to_channels_first(const Tensor& clip) {
  require(clip.rank() == 4 && clip.dim(3) == 3, ErrorCategory::kInvalidArgument,
          "clip must be [T, H, W, 3], got " + shape_to_string(clip.shape()));
  const auto t = clip.dim(0), h = clip.dim(1), w = clip.dim(2);
  Tensor out({3, t, h, w});
  const std::int64_t plane = t * h * w;
  for (std::int64_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c) out[c * plane + i] = clip[i * 3 + c];
  return out;
}

FeatureVector Pathway::forward(const Tensor& clip, PathwayCache* cache) const {
  const Shape expected{config_.num_frames, config_.spatial_size, config_.spatial_size, 3};
  require(clip.shape() == expected, ErrorCategory::kInvalidArgument,
          "pathway(" + std::string(level_name(level_)) + "): clip shape " +
              shape_to_string(clip.shape()) + " does not match " + shape_to_string(expected));
  if (cache) cache->blocks.assign(blocks_.size(), {});

  Tensor x = stem_.forward(params_, clip_to_channels_first(clip), cache ? &cache->stem : nullptr);
  ops::relu_inplace(x, cache ? &cache->stem_mask : nullptr);
  if (stem_pool_) x = ops::maxpool3d_forward(x, *stem_pool_, cache ? &cache->pool : nullptr);

  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    BlockCache* bc = cache ? &cache->blocks[i] : nullptr;
    Tensor y = blk.a.forward(params_, x, bc ? &bc->a : nullptr);
    ops::relu_inplace(y, bc ? &bc->mask_a : nullptr);
    y = blk.b.forward(params_, y, bc ? &bc->b : nullptr);
    if (blk.c) {
      ops::relu_inplace(y, bc ? &bc->mask_b : nullptr);
      y = blk.c->forward(params_, y, bc ? &bc->c : nullptr);
    }
    if (blk.shortcut) ops::add_inplace(y, blk.shortcut->forward(params_, x, bc ? &bc->shortcut : nullptr));
    else ops::add_inplace(y, x);
    ops::relu_inplace(y, bc ? &bc->mask_out : nullptr);
    x = std::move(y);
  }
  if (projection_) {
    x = projection_->forward(params_, x, cache ? &cache->projection : nullptr);
    ops::relu_inplace(x, cache ? &cache->projection_mask : nullptr);
  }
  if (cache) cache->pooled_shape = x.shape();
  Tensor pooled = ops::global_avg_pool(x);
  require(pooled.all_finite(), ErrorCategory::kDivergence,
          "pathway(" + std::string(level_name(level_)) + "): non-finite activations");
  return FeatureVector{pooled.to_vector(), level_};
}

std::vector<FeatureVector> Pathway::forward_batch(std::span<const Tensor> clips) const {
  std::vector<FeatureVector> out;
  out.reserve(clips.size());
  for (const auto& clip : clips) out.push_back(forward(clip));
  return out;
}

void Pathway::backward(const PathwayCache& cache, std::span<const double> grad_feature) {
  require(static_cast<int>(grad_feature.size()) == config_.feature_dim, ErrorCategory::kInvalidArgument,
          "pathway backward: gradient length mismatch");
  Tensor g = ops::global_avg_pool_backward(
      Tensor({config_.feature_dim}, std::vector<double>(grad_feature.begin(), grad_feature.end())),
      cache.pooled_shape);
  if (projection_) {
    ops::relu_backward_inplace(g, cache.projection_mask);
    g = projection_->backward(params_, cache.projection, g);
  }
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const Block& blk = blocks_[i];
    const BlockCache& bc = cache.blocks[i];
    ops::relu_backward_inplace(g, bc.mask_out);
    Tensor skip = blk.shortcut ? blk.shortcut->backward(params_, bc.shortcut, g) : g;
    Tensor d = g;
    if (blk.c) {
      d = blk.c->backward(params_, bc.c, d);
      ops::relu_backward_inplace(d, bc.mask_b);
    }
    d = blk.b.backward(params_, bc.b, d);
    ops::relu_backward_inplace(d, bc.mask_a);
    d = blk.a.backward(params_, bc.a, d);
    ops::add_inplace(d, skip);
    g = std::move(d);
  }
  if (stem_pool_) g = ops::maxpool3d_backward(g, cache.pool);
  ops::relu_backward_inplace(g, cache.stem_mask);
  stem_.backward(params_, cache.stem, g, /*need_input_grad=*/false);
}

ClassifierHead::ClassifierHead(int input_dim, int class_count, std::uint64_t init_seed) {
  Rng rng(init_seed);
  layer_ = LinearLayer::create(params_, "classifier", input_dim, class_count, rng, 0.01);
}

std::vector<double> ClassifierHead::logits(std::span<const double> feature) const {
  require(static_cast<int>(feature.size()) == layer_.in_dim, ErrorCategory::kInvalidArgument,
          "classifier: feature dim " + std::to_string(feature.size()) + " does not match input dim " +
              std::to_string(layer_.in_dim));
  Tensor x({layer_.in_dim}, std::vector<double>(feature.begin(), feature.end()));
  return layer_.forward(params_, x).to_vector();
}

std::vector<double> ClassifierHead::backward(std::span<const double> feature,
                                             std::span<const double> grad_logits) {
  Tensor x({layer_.in_dim}, std::vector<double>(feature.begin(), feature.end()));
  Tensor dy({layer_.out_dim}, std::vector<double>(grad_logits.begin(), grad_logits.end()));
  return layer_.backward(params_, x, dy).to_vector();
}

std::vector<double> single_level_logits(const FeatureVector& feature, const ClassifierHead& head) {
  return head.logits(feature.values);
}

}  // namespace hieract
