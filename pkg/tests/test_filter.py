import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from naefilter.cnf import Assignment, ContractError, eval_clause_nae
from naefilter.filter import (HEADER_SIZE, BuildError, FilterFormatError, FilterHeader,
                              NaeSatFilter, SolutionMatrix, build, deserialize, from_solutions,
                              lane_masks, serialize)
from naefilter.keyhash import HashMode, HashSpec, build_cnf, derive_clause
from naefilter.cnf import brute_force_nae_solutions
from naefilter.metrics import fpr_theory_nae, measure_fpr, within_sigma

from conftest import random_u64


def random_filter(n, k, s, seed, m=10):
    """Filter over random (not necessarily valid) solutions; used for kernel checks."""
    rng = np.random.default_rng(seed)
    sols = [Assignment(rng.integers(0, 2, n)) for _ in range(s)]
    header = FilterHeader(k, n, m, s, HashSpec(mode=HashMode(seed % 2), base_seed=seed))
    return NaeSatFilter(header, SolutionMatrix.pack(sols))


@pytest.fixture(scope="module")
def small_filter():
    keys = random_u64(400, 1)
    return keys, build(keys, 4, 100, 20, seed=3)


class TestSolutionMatrix:
    @pytest.mark.parametrize("s", [1, 5, 63, 64, 65, 130])
    def test_columns_round_trip(self, s):
        rng = np.random.default_rng(s)
        sols = [Assignment(rng.integers(0, 2, 37)) for _ in range(s)]
        mat = SolutionMatrix.pack(sols)
        assert mat.words.shape == (37, (s + 63) // 64)
        assert mat.unpack() == sols
        assert not np.any(mat.words & ~lane_masks(s))

    def test_row_layout(self):
        sols = [Assignment([1, 0]), Assignment([1, 1]), Assignment([0, 1])]
        mat = SolutionMatrix.pack(sols)
        assert int(mat.words[0, 0]) == 0b011
        assert int(mat.words[1, 0]) == 0b110

    def test_nonzero_pad_rejected(self):
        with pytest.raises(ContractError):
            SolutionMatrix(np.array([[0b1000]], dtype=np.uint64), 3)


class TestBuild:
    def test_single_xor_clause(self):
        f = build([b"only"], 2, 2, 1)
        sol = f.solutions()[0]
        cnf = build_cnf([b"only"], HashSpec(), 2, 2)
        assert sol in brute_force_nae_solutions(cnf)

    def test_n_less_than_k(self):
        with pytest.raises(ContractError):
            build([b"a"], 5, 4, 1)

    def test_empty_keys(self):
        with pytest.raises(ContractError):
            build([], 3, 10, 1)

    def test_deterministic(self):
        keys = random_u64(300, 2)
        assert build(keys, 4, 80, 6, seed=5) == build(keys, 4, 80, 6, seed=5)

    def test_unsatisfiable_reports(self):
        keys = random_u64(200, 0)
        with pytest.warns(RuntimeWarning):
            with pytest.raises(BuildError) as exc:
                build(keys, 3, 10, 2, max_attempts=3)
        assert exc.value.achieved_s < 2
        assert exc.value.alpha == 20.0

    def test_duplicate_keys_allowed(self):
        f = build([b"a", b"a", b"b"], 3, 6, 2)
        assert f.query(b"a") and f.query(b"b")


class TestQuery:
    def test_no_false_negatives(self, small_filter):
        keys, flt = small_filter
        assert flt.query_many(keys).all()
        assert all(flt.query(int(k)) for k in keys[:50])

    def test_all_positive_clause_vs_zero_solution(self):
        header = FilterHeader(3, 8, 1, 1, HashSpec())
        flt = NaeSatFilter(header, SolutionMatrix.pack([Assignment(np.zeros(8))]))
        for i in range(200):
            key = i.to_bytes(4, "little")
            c = derive_clause(key, HashSpec(), 8, 3)
            if not any(lit.negated for lit in c.literals):
                assert flt.query(key) is False
                break
        else:
            pytest.fail("no all-positive clause among 200 keys")

    def test_batch_equals_map(self, small_filter):
        _, flt = small_filter
        keys = random_u64(2000, 99)
        assert list(flt.query_many(keys)) == [flt.query(int(k)) for k in keys]

    def test_query_batch_timing(self, small_filter):
        keys, flt = small_filter
        answers, total, per = flt.query_batch(keys)
        assert answers.all() and total >= 0 and per >= 0

    @pytest.mark.parametrize("s", [1, 3, 64, 65, 100])
    @pytest.mark.parametrize("nae", [True, False])
    def test_packed_matches_scalar(self, s, nae):
        flt = random_filter(40, 3, s, seed=s)
        keys = [i.to_bytes(8, "little") for i in range(400)]
        packed = flt.query_many(keys, nae=nae)
        assert list(packed) == [flt.scalar_query_reference(k, nae=nae) for k in keys]

    def test_s1_agrees_with_clause_evaluation(self):
        flt = random_filter(20, 4, 1, seed=4)
        sol = flt.solutions()[0]
        for i in range(200):
            key = i.to_bytes(2, "little")
            assert flt.query(key) == eval_clause_nae(flt.clause_for(key), sol)

    def test_scalar_reference_members(self, small_filter):
        keys, flt = small_filter
        assert all(flt.scalar_query_reference(int(k)) for k in keys[:30])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 70), st.integers(2, 6), st.integers(1, 140), st.integers(0, 10 ** 6),
           st.lists(st.binary(max_size=12), min_size=1, max_size=20))
    def test_packed_matches_scalar_property(self, n, k, s, seed, keys):
        k = min(k, n)
        flt = random_filter(n, k, s, seed)
        assert list(flt.query_many(keys)) == [flt.scalar_query_reference(key) for key in keys]

    def test_nae_fpr_matches_theory_for_independent_solutions(self):
        # uniformly random solutions are independent by construction
        flt = random_filter(4000, 4, 11, seed=0, m=16384)
        est = measure_fpr(flt, 200_000, rng_seed=1)
        assert within_sigma(est, fpr_theory_nae(4, 11))

    def test_truncated_prefix(self, small_filter):
        _, flt = small_filter
        t = flt.truncated(5)
        assert t.s == 5 and t.solutions() == flt.solutions()[:5]


class TestSerialization:
    def test_round_trip(self, small_filter):
        _, flt = small_filter
        data = serialize(flt)
        assert deserialize(data) == flt
        assert serialize(deserialize(data)) == data

    def test_size_accounting(self, small_filter):
        _, flt = small_filter
        assert len(serialize(flt)) == HEADER_SIZE + flt.n * ((flt.s + 63) // 64) * 8

    def test_header_layout(self, small_filter):
        _, flt = small_filter
        data = serialize(flt)
        assert data[:4] == b"NAEF"
        version, k = struct.unpack_from("<HH", data, 4)
        n, m = struct.unpack_from("<QQ", data, 8)
        (s,) = struct.unpack_from("<I", data, 24)
        assert (version, k, n, m, s) == (1, 4, 100, 400, 20)

    def test_bad_magic(self, small_filter):
        data = bytearray(serialize(small_filter[1]))
        data[0] ^= 0xFF
        with pytest.raises(FilterFormatError, match="magic"):
            deserialize(bytes(data))

    def test_s_zero(self, small_filter):
        data = bytearray(serialize(small_filter[1]))
        struct.pack_into("<I", data, 24, 0)
        with pytest.raises(FilterFormatError, match="s=0"):
            deserialize(bytes(data))

    def test_truncated(self, small_filter):
        data = serialize(small_filter[1])
        with pytest.raises(FilterFormatError):
            deserialize(data[:-1])
        with pytest.raises(FilterFormatError):
            deserialize(data[:10])

    def test_pad_bits(self, small_filter):
        data = bytearray(serialize(small_filter[1]))
        data[HEADER_SIZE + 7] |= 0x80
        with pytest.raises(FilterFormatError, match="pad"):
            deserialize(bytes(data))

    def test_unknown_algorithm(self, small_filter):
        data = bytearray(serialize(small_filter[1]))
        struct.pack_into("<H", data, 28, 99)
        with pytest.raises(FilterFormatError, match="algorithm"):
            deserialize(bytes(data))

    def test_file_round_trip(self, small_filter, tmp_path):
        _, flt = small_filter
        p = tmp_path / "f.naef"
        flt.save(p)
        assert NaeSatFilter.load(p) == flt


class TestImport:
    def test_from_brute_force(self):
        keys = [bytes([i]) for i in range(12)]
        cnf = build_cnf(keys, HashSpec(), 12, 3)
        sols = brute_force_nae_solutions(cnf)[:4]
        flt = from_solutions(keys, 3, 12, sols)
        assert flt.query_many(keys).all()
        assert flt.header.build_engine == "imported"

    def test_rejects_non_solution(self):
        keys = [bytes([i]) for i in range(12)]
        cnf = build_cnf(keys, HashSpec(), 12, 3)
        bad = next(a for a in (Assignment([i >> j & 1 for j in range(12)]) for i in range(4096))
                   if a not in set(brute_force_nae_solutions(cnf)))
        with pytest.raises(ContractError, match="solution 0"):
            from_solutions(keys, 3, 12, [bad])
