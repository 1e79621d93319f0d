import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mpcforge.engine import ProtocolConfig, Runtime
from mpcforge.errors import ParamError
from mpcforge.kernels import (KERNELS, compare_vectors, execute, make_inputs, merge_exchange, plain_kernel,
                              radix_sort, share)

from helpers import FAMILY_NAMES, small_config


def _run(family, kernel, n, data, **extra):
    cfg = small_config(family, **extra)
    return execute(Runtime(cfg), kernel, n, data), cfg


def test_compare_exhaustive_4bit_rep3():
    pairs = list(itertools.product(range(16), repeat=2))
    data = {"a": [a for a, _ in pairs], "b": [b for _, b in pairs]}
    got, _ = _run("Rep3Ring", "compare", len(pairs), data, value_bits=4)
    assert got == [int(a < b) for a, b in pairs]


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_compare_edges(family):
    cfg = small_config(family)
    top = min(1 << cfg.ell, cfg.plain_modulus) - 1
    vals = [0, 1, 7, top]
    assert execute(Runtime(cfg), "compare", 4, {"a": vals, "b": vals}) == [0] * 4
    assert execute(Runtime(cfg), "compare", 4, {"a": [0] * 4, "b": [top] * 4}) == [1] * 4


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_sort_examples(family):
    cfg = small_config(family)
    top = min(1 << cfg.ell, cfg.plain_modulus)
    for seed in range(3):
        data = make_inputs(cfg, "sort", 16, seed)
        assert execute(Runtime(cfg), "sort", 16, data) == sorted(data["v"])
    ordered = list(range(0, top, max(1, top // 8)))[:8]
    assert execute(Runtime(cfg), "sort", len(ordered), {"v": ordered}) == ordered
    assert execute(Runtime(cfg), "sort", 6, {"v": [5] * 6}) == [5] * 6
    assert execute(Runtime(cfg), "sort", 1, {"v": [3]}) == [3]


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_inner_product_examples(family):
    cfg = small_config(family)
    mod = cfg.plain_modulus
    assert execute(Runtime(cfg), "inner", 3, {"a": [1, 2, 3], "b": [4, 5, 6]}) == [32 % mod]
    assert execute(Runtime(cfg), "inner", 3, {"a": [1, 2, 3], "b": [0, 0, 0]}) == [0]
    assert execute(Runtime(cfg), "inner", 3, {"a": [0, 1, 0], "b": [9, 8, 7]}) == [8]


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_matmul_examples(family):
    cfg = small_config(family)
    mod = cfg.plain_modulus
    A, B = [1, 2, 3, 4], [5, 6, 7, 8]
    assert execute(Runtime(cfg), "matmul", 2, {"a": A, "b": B}) == [v % mod for v in (19, 22, 43, 50)]
    assert execute(Runtime(cfg), "matmul", 2, {"a": [1, 0, 0, 1], "b": B}) == B
    assert execute(Runtime(cfg), "matmul", 2, {"a": [0] * 4, "b": B}) == [0] * 4


@pytest.mark.parametrize("family", ["Semi", "Semi2k", "SpdzField", "Spdz2k"])
def test_triple_counts(family):
    cfg = small_config(family)
    for kernel, n, expect in (("inner", 20, 20), ("matmul", 3, 27)):
        rt = Runtime(cfg)
        execute(rt, kernel, n, make_inputs(cfg, kernel, n))
        assert rt.s.counters.triples_consumed == expect


def test_merge_exchange_sorts_all_binary_inputs():
    # zero-one principle: a comparator network sorts everything iff it sorts all 0/1 inputs
    for n in range(1, 11):
        layers = merge_exchange(n)
        for layer in layers:
            touched = [i for pair in layer for i in pair]
            assert len(touched) == len(set(touched))
        for bits in itertools.product((0, 1), repeat=n):
            v = list(bits)
            for layer in layers:
                for i, j in layer:
                    if v[i] > v[j]:
                        v[i], v[j] = v[j], v[i]
            assert v == sorted(bits)


def test_kernel_argument_errors():
    cfg = small_config("Semi2k")
    with pytest.raises(ParamError):
        make_inputs(cfg, "fft", 4)
    rt = Runtime(cfg)
    with pytest.raises(ParamError):
        compare_vectors(rt, share(rt, [1, 2]), share(rt, [1]))
    with pytest.raises(ParamError):
        execute(rt, "fft", 1, {})


def test_inputs_respect_domain():
    for family in FAMILY_NAMES:
        cfg = small_config(family)
        for kernel in KERNELS:
            data = make_inputs(cfg, kernel, 5, seed=2)
            bound = min(1 << cfg.ell, cfg.plain_modulus)
            assert all(0 <= v < bound for vals in data.values() for v in vals)
            assert len(next(iter(data.values()))) == (25 if kernel == "matmul" else 5)


@settings(max_examples=15)
@given(st.sampled_from(["compare", "sort", "inner"]), st.integers(0, 10_000), st.integers(0, 10_000))
def test_transcript_shape_ignores_values(kernel, s1, s2):
    cfg = small_config("Spdz2k")
    shapes = []
    for seed in (s1, s2):
        rt = Runtime(cfg)
        data = make_inputs(cfg, kernel, 6, seed)
        assert execute(rt, kernel, 6, data) == plain_kernel(cfg, kernel, 6, data)
        shapes.append(rt.net.shape())
    assert shapes[0] == shapes[1]


def test_radix_sort_direct():
    cfg = small_config("Semi2k", value_bits=3)
    rt = Runtime(cfg)
    v = rt.input(0, [7, 0, 3, 3, 6, 1])
    assert rt.reveal(radix_sort(rt, v)) == [0, 1, 3, 3, 6, 7]


@pytest.mark.parametrize("validation", ["sacrifice", "batch_poly", "bucket_cnc"])
def test_spdz_field_validations_run_kernels(validation):
    cfg = ProtocolConfig("SpdzField", prime=(1 << 61) - 1, validation=validation)
    for kernel, n in (("compare", 40), ("inner", 40), ("matmul", 3), ("sort", 4)):
        data = make_inputs(cfg, kernel, n, 5)
        rt = Runtime(cfg)
        assert execute(rt, kernel, n, data) == plain_kernel(cfg, kernel, n, data)
        assert rt.s.counters.aux_consumed > 0
