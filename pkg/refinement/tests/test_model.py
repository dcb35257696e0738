"""Refinement network assembly and forward contract."""

from __future__ import annotations

import pytest
import torch

from refinement import AttentionBlock, RefinementConfig, build_refinement_net


def test_forward_preserves_shape_and_range(small_cfg):
    torch.manual_seed(0)
    net = build_refinement_net(small_cfg)
    x = torch.rand(2, 3, 64, 64)
    y = net(x)
    assert y.shape == (2, 3, 64, 64)
    assert (y >= 0).all() and (y <= 1).all()


def test_bottleneck_spatial_size(small_cfg):
    torch.manual_seed(0)
    net = build_refinement_net(small_cfg)
    y = net.stem(torch.rand(1, 3, 64, 64))
    for block in net.encoders:
        y = block(y)
    # 64 halved by each of the 3 encode blocks.
    assert y.shape[-2:] == (8, 8)
    assert y.shape[1] == small_cfg.bottleneck_channels


def test_channel_progression(small_cfg):
    net = build_refinement_net(small_cfg)
    c = small_cfg.base_channels
    encode_channels = [b.shortcut.out_channels for b in net.encoders]
    decode_channels = [b.shortcut.out_channels for b in net.decoders]
    assert encode_channels == [2 * c, 4 * c, 8 * c]
    assert decode_channels == [4 * c, 2 * c, c]
    assert len(net.latents) == small_cfg.n_lab
    assert all(isinstance(b, AttentionBlock) for b in net.latents)


def test_block_counts_follow_config():
    cfg = RefinementConfig(base_channels=8, n_eab=2, n_dab=2, n_lab=4, lambda_per=0.0)
    net = build_refinement_net(cfg)
    assert len(net.encoders) == 2
    assert len(net.latents) == 4
    assert len(net.decoders) == 2


def test_build_rejects_bottleneck_below_hourglass():
    # 16 / 2^3 = 2, too small for a depth-2 hourglass.
    cfg = RefinementConfig(image_size=16, base_channels=8, lambda_per=0.0)
    with pytest.raises(ValueError, match="bottleneck"):
        build_refinement_net(cfg)


def test_forward_rejects_wrong_channels(small_cfg):
    net = build_refinement_net(small_cfg)
    with pytest.raises(ValueError, match=r"\(B, 3, H, W\)"):
        net(torch.rand(1, 1, 64, 64))


def test_forward_rejects_indivisible_size(small_cfg):
    net = build_refinement_net(small_cfg)
    with pytest.raises(ValueError, match="divisible"):
        net(torch.rand(1, 3, 48, 48))


def test_forward_deterministic_given_seed(small_cfg):
    torch.manual_seed(5)
    net_a = build_refinement_net(small_cfg)
    torch.manual_seed(5)
    net_b = build_refinement_net(small_cfg)
    x = torch.rand(1, 3, 64, 64)
    assert torch.equal(net_a(x), net_b(x))
