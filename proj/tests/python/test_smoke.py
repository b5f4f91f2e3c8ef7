"""Smoke tests for the facadewin python module."""

import numpy as np
import pytest

import facadewin as fw


def test_box_iou():
    a = fw.BBox(0, 0, 10, 10)
    assert fw.iou_box(a, a) == 1.0
    assert fw.iou_box(a, fw.BBox(20, 20, 5, 5)) == 0.0
    assert fw.iou_box(a, fw.BBox(5, 0, 10, 10)) == pytest.approx(50.0 / 150.0)


def test_mask_roundtrip_numpy():
    rng = np.random.default_rng(3)
    dense = (rng.random((16, 16)) > 0.5).astype(np.uint8)
    mask = fw.BinaryMask.from_array(dense)
    assert mask.popcount() == int(dense.sum())
    np.testing.assert_array_equal(mask.to_array(), dense)

    zeros = fw.BinaryMask.from_array(np.zeros((4, 4), dtype=np.uint8))
    assert list(zeros.runs) == [16]
    ones = fw.BinaryMask.from_array(np.ones((4, 4), dtype=np.uint8))
    assert list(ones.runs) == [0, 16]


def test_planner_rules():
    assert fw.plan_depth(12.8) == 2
    assert fw.plan_depth(25.6) == 3
    with pytest.raises(fw.FacadewinError):
        fw.plan_depth(3.0)
    assert fw.estimate_object_width(128) == pytest.approx(12.8)
    assert fw.plan_rois(10.0) == 30

    weights = fw.normalize_weights(fw.LossWeights(1, 1, 3, 1, 1))
    assert weights.gamma == pytest.approx(3.0 / 7.0)
    total = fw.combine_losses(fw.LossWeights(1, 1, 1, 1, 3), [0.1, 0.1, 0.1, 0.1, 0.2])
    assert total == pytest.approx(1.0)


def test_zero_noise_pipeline_is_perfect():
    spec = fw.FacadeSceneSpec()
    spec.rows = 3
    spec.cols = 3
    scene = fw.generate_facade(spec)
    assert len(scene.annotations) == 9

    dets = fw.simulate_detector(scene.annotations, fw.DetectorNoiseSpec())
    report = fw.evaluate(dets, scene.annotations, p_min=0.5, mode="box")
    assert report.recall == 1.0
    assert report.precision == 1.0
    assert report.ap50 == 1.0
    mask_report = fw.evaluate(dets, scene.annotations, p_min=0.5, mode="mask")
    assert mask_report.ap50 == 1.0


def test_build_config_from_scene_stats():
    spec = fw.FacadeSceneSpec()  # 128 px, 4x4 grid of 12 px windows
    scene = fw.generate_facade(spec)
    widths = fw.Quantiles(12.0, 12.0, 12.0)
    aspects = fw.Quantiles(1.0, 1.0, 1.0)
    stats = fw.DatasetStats(128, widths, aspects, 16.0, 12.0 / 128.0)
    config = fw.build_config(stats)
    assert config.k_layer == 1  # 12 / 4 = 3 is not > 3
    assert config.anchor_scales == [12]
    assert config.rois_per_image == 48
    assert fw.anchor_coverage(config, scene.annotations) == 1.0


def test_nms_and_sweep():
    gts = [fw.WindowAnnotation("i", fw.BBox(10, 10, 10, 10), fw.mask_from_box(64, 64, fw.BBox(10, 10, 10, 10)))]
    dets = [
        fw.Detection("i", fw.BBox(10, 10, 10, 10), 0.9),
        fw.Detection("i", fw.BBox(10, 10, 10, 10), 0.8),
        fw.Detection("i", fw.BBox(40, 40, 8, 8), 0.4),
    ]
    kept = fw.nms(dets)
    assert len(kept) == 2
    assert len(fw.nms(kept)) == 2  # idempotent

    # F1 peaks once only the score-0.9 true positive survives: the first
    # grid point above 0.8 wins.
    sweep = fw.sweep_threshold(dets, gts, objective="f1")
    assert sweep.best_threshold == pytest.approx(0.85)
    doubles = fw.find_double_detections(dets, gts)
    assert len(doubles) == 1 and doubles[0].count == 2


def test_equalize_and_rotate():
    rng = np.random.default_rng(11)
    image = rng.integers(90, 140, size=(32, 32, 3), dtype=np.uint8)
    out = fw.equalize_histogram(image)
    assert out.shape == image.shape
    # Order preservation on the BT.601 luminance.
    w = np.array([0.299, 0.587, 0.114])
    lum_in = np.rint(image @ w).astype(int).ravel()
    lum_out = np.rint(out @ w).astype(int).ravel()
    order = np.argsort(lum_in, kind="stable")
    assert (np.diff(lum_out[order]) >= 0).all()

    turned = image
    for _ in range(4):
        turned = fw.rotate90(turned)
    np.testing.assert_array_equal(turned, image)


def test_split_and_citygml():
    ids = [f"img{i}" for i in range(100)]
    split = fw.split_dataset(ids, 7)
    assert (len(split.train), len(split.val), len(split.test)) == (60, 20, 20)
    again = fw.split_dataset(ids, 7)
    assert list(split.train) == list(again.train)

    manifest = fw.parse_citygml(
        """<?xml version="1.0"?>
        <CityModel xmlns:app="http://www.opengis.net/citygml/appearance/2.0">
          <app:ParameterizedTexture>
            <app:imageURI>wall.png</app:imageURI>
            <app:target uri="#s1"/>
          </app:ParameterizedTexture>
        </CityModel>"""
    )
    assert len(manifest.entries) == 1
    assert manifest.entries[0].texture_path == "wall.png"
    reloaded = fw.manifest_from_json(manifest.to_json())
    assert reloaded.entries[0].surface_id == "s1"
    with pytest.raises(fw.FacadewinError):
        fw.parse_citygml("<CityModel><unclosed>")
