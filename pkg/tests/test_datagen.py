import numpy as np
import pytest

from rawdb.catalog import Catalog
from rawdb.datagen import (
    DatasetSpec,
    gen_hhit,
    gen_movc,
    gen_rseq,
    gen_rseq_shf,
    gen_zipf,
    generate,
    window_bounds,
    write_dataset,
)
from rawdb.errors import (
    CardinalityInfeasibleError,
    IndivisibleSizeError,
    WindowExceedsCardinalityError,
)


def spec(dist, r, c, **kw):
    return DatasetSpec(distribution=dist, r=r, c=c, **kw)


# --- rseq ---

def test_rseq_8_4():
    assert gen_rseq(spec("rseq", 8, 4)).tolist() == [1, 1, 2, 2, 3, 3, 4, 4]


def test_rseq_one_per_segment():
    assert gen_rseq(spec("rseq", 4, 4)).tolist() == [1, 2, 3, 4]


def test_rseq_indivisible():
    with pytest.raises(IndivisibleSizeError):
        gen_rseq(spec("rseq", 10, 4))


def test_rseq_nondecreasing_and_exact_cardinality():
    keys = gen_rseq(spec("rseq", 10_000, 100))
    assert (np.diff(keys) >= 0).all()
    assert len(np.unique(keys)) == 100


# --- rseq_shf ---

def test_rseq_shf_multiset_and_seed_stability():
    s = spec("rseq_shf", 8, 4, seed=3)
    a = gen_rseq_shf(s)
    b = gen_rseq_shf(s)
    assert a.tolist() == b.tolist()
    assert sorted(a.tolist()) == [1, 1, 2, 2, 3, 3, 4, 4]


def test_rseq_shf_seed_changes_order():
    a = gen_rseq_shf(spec("rseq_shf", 10_000, 100, seed=1))
    b = gen_rseq_shf(spec("rseq_shf", 10_000, 100, seed=2))
    assert a.tolist() != b.tolist()
    assert sorted(a.tolist()) == sorted(b.tolist())


# --- hhit ---

def test_hhit_hitter_share_and_cardinality():
    keys = gen_hhit(spec("hhit", 100, 10, seed=5), shuffled=False)
    counts = np.bincount(keys)
    assert counts.max() == 50
    assert len(np.unique(keys)) == 10


def test_hhit_smallest_case():
    keys = gen_hhit(spec("hhit", 4, 2, seed=1), shuffled=False)
    counts = np.bincount(keys)[1:]
    assert sorted(counts.tolist()) == [2, 2]  # hitter 2, other >= 1 and total 4


def test_hhit_unshuffled_hitter_is_positional():
    keys = gen_hhit(spec("hhit", 101, 10, seed=9), shuffled=False)
    half = 101 // 2
    assert len(set(keys[:half].tolist())) == 1


def test_hhit_infeasible():
    with pytest.raises(CardinalityInfeasibleError):
        gen_hhit(spec("hhit", 10, 6), shuffled=False)


def test_hhit_shuffled_spreads_hitter():
    keys = gen_hhit(spec("hhit", 10_000, 16, seed=2), shuffled=True)
    half = len(keys) // 2
    assert len(set(keys[:half].tolist())) > 1
    counts = np.bincount(keys)
    assert counts.max() == 5000


# --- zipf ---

def test_zipf_weight_ratio():
    assert (1.0 ** -0.5) / (4.0 ** -0.5) == pytest.approx(2.0)


def test_zipf_small_c_hits_cardinality():
    keys = gen_zipf(spec("zipf", 100_000, 16, seed=11))
    assert len(np.unique(keys)) == 16


def test_zipf_c1():
    assert set(gen_zipf(spec("zipf", 50, 1)).tolist()) == {1}


def test_zipf_empirical_rank_ratio():
    keys = gen_zipf(spec("zipf", 1_000_000, 1024, seed=4))
    counts = np.bincount(keys, minlength=1025)
    ratio = counts[1] / counts[4]
    assert 1.8 <= ratio <= 2.2


# --- movc ---

def test_movc_window_formula_cases():
    s = spec("movc", 1000, 128, W=64)
    assert window_bounds(s, 0) == (0, 64)
    assert window_bounds(s, 500) == (32, 96)


def test_movc_keys_stay_in_window():
    s = spec("movc", 5000, 128, W=64, seed=13)
    keys = gen_movc(s)
    lows = (128 - 64) * np.arange(5000, dtype=np.int64) // 5000
    assert ((keys >= lows) & (keys <= lows + 64)).all()
    assert (np.diff(lows) >= 0).all()


def test_movc_degenerate_window():
    s = spec("movc", 1000, 64, W=64, seed=1)
    keys = gen_movc(s)
    assert keys.max() - keys.min() <= 64


def test_movc_window_exceeds_cardinality():
    with pytest.raises(WindowExceedsCardinalityError):
        gen_movc(spec("movc", 1000, 32, W=64))


# --- determinism classes and reproducibility ---

@pytest.mark.parametrize("dist", ["rseq", "rseq_shf", "hhit", "hhit_shf"])
def test_deterministic_cardinality(dist):
    keys = generate(spec(dist, 4096, 64, seed=21))
    assert len(np.unique(keys)) == 64


@pytest.mark.parametrize("dist", ["zipf", "movc"])
def test_probabilistic_cardinality_bounded(dist):
    keys = generate(spec(dist, 4096, 256, seed=21))
    assert len(np.unique(keys)) <= 256 + 1  # movc windows are 0-based


@pytest.mark.parametrize("dist", ["rseq", "rseq_shf", "hhit", "hhit_shf", "zipf", "movc"])
def test_seeded_runs_identical(dist, tmp_path):
    s = spec(dist, 4096, 64, seed=33)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_dataset(generate(s), str(p1))
    write_dataset(generate(s), str(p2))
    assert p1.read_bytes() == p2.read_bytes()


# --- write_dataset ---

def test_write_csv_line_count(tmp_path):
    p = tmp_path / "d.csv"
    write_dataset([1, 2, 3], str(p))
    lines = p.read_text().strip().splitlines()
    assert len(lines) == 4  # header + 3


def test_round_trip_through_catalog(tmp_path):
    p = tmp_path / "d.csv"
    keys = generate(spec("zipf", 500, 16, seed=3))
    write_dataset(keys, str(p))
    cat = Catalog()
    h = cat.register_table("d", str(p), "csv")
    rows = cat.read_rows(h)
    assert [r[0] for r in rows] == keys.tolist()


def test_write_unwritable_path(tmp_path):
    with pytest.raises(IOError):
        write_dataset([1], str(tmp_path / "missing_dir" / "d.csv"))


def test_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpec(distribution="rseq", r=4, c=8)
    with pytest.raises(ValueError):
        DatasetSpec(distribution="wat", r=8, c=4)
