import numpy as np
import pytest
from scipy import stats

from hubridge.data import (
    PairedDataset,
    SyntheticConfig,
    dataset_from_manifest,
    generate_synthetic,
    load_embeddings,
    load_lexicon,
    pair_by_lexicon,
    random_project,
    read_manifest,
    save_embeddings,
    split,
    write_manifest,
)
from hubridge.errors import DimensionMismatch, FileFormatError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestPairedDataset:
    def test_column_mismatch(self):
        with pytest.raises(DimensionMismatch):
            PairedDataset(np.zeros((2, 3)), np.zeros((2, 4)), ("a", "b", "c"))

    def test_subset_keeps_alignment(self):
        ds = PairedDataset(np.arange(6.0).reshape(2, 3), -np.arange(6.0).reshape(2, 3), ("a", "b", "c"))
        sub = ds.subset([2, 0])
        assert sub.ids == ("c", "a")
        np.testing.assert_array_equal(sub.source, -sub.target)

    def test_digest_depends_on_values(self):
        a = PairedDataset(np.ones((2, 2)), np.ones((2, 2)), ("a", "b"))
        b = PairedDataset(np.ones((2, 2)) * 2, np.ones((2, 2)), ("a", "b"))
        assert a.digest() == PairedDataset(np.ones((2, 2)), np.ones((2, 2)), ("a", "b")).digest()
        assert a.digest() != b.digest()


class TestSynthetic:
    def test_shapes_and_determinism(self):
        cfg = SyntheticConfig(num_pairs=30, latent_dim=40, source_dim=8, target_dim=6, seed=2)
        a, b = generate_synthetic(cfg), generate_synthetic(cfg)
        assert a.source.shape == (8, 30) and a.target.shape == (6, 30)
        np.testing.assert_array_equal(a.source, b.source)
        np.testing.assert_array_equal(a.target, b.target)
        assert a.ids == b.ids and len(set(a.ids)) == 30

    def test_seed_changes_data(self):
        a = generate_synthetic(SyntheticConfig(20, 30, 5, 5, seed=0))
        b = generate_synthetic(SyntheticConfig(20, 30, 5, 5, seed=1))
        assert not np.array_equal(a.source, b.source)

    @staticmethod
    def _gram_correlation(latent, dim):
        cfg = SyntheticConfig(num_pairs=200, latent_dim=latent, source_dim=dim, target_dim=dim, seed=0)
        ds = generate_synthetic(cfg)
        # same stream the generator uses for the latent matrix
        latent_ss = np.random.SeedSequence(cfg.seed).spawn(3)[0]
        Z = np.random.default_rng(latent_ss).standard_normal((latent, cfg.num_pairs))
        iu = np.triu_indices(cfg.num_pairs, 1)
        return stats.pearsonr((ds.source.T @ ds.source)[iu], (Z.T @ Z)[iu])[0]

    @pytest.mark.parametrize("latent,dim", [(1000, 100), (300, 100), (150, 100)])
    def test_gram_correlation_matches_prediction(self, latent, dim):
        # off-diagonal noise in R^T R gives r = sqrt(rho / (1 + rho)), rho = dim / latent
        rho = dim / latent
        assert self._gram_correlation(latent, dim) == pytest.approx(np.sqrt(rho / (1 + rho)), abs=0.05)

    def test_gram_correlation_desk_scale(self):
        assert self._gram_correlation(150, 100) > 0.5

    def test_dim_above_latent(self):
        with pytest.raises(ValueError):
            SyntheticConfig(num_pairs=10, latent_dim=5, source_dim=6)


class TestRandomProject:
    def test_identity_override(self):
        m = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(random_project(m, 3, 0, projection=np.eye(3)), m)

    def test_deterministic(self):
        m = np.random.default_rng(0).standard_normal((10, 7))
        np.testing.assert_array_equal(random_project(m, 4, 5), random_project(m, 4, 5))

    @staticmethod
    def _distance_rank_correlation(m):
        p = random_project(m, 500, 0)
        iu = np.triu_indices(m.shape[1], 1)
        d_in = np.linalg.norm(m[:, :, None] - m[:, None, :], axis=0)[iu]
        d_out = np.linalg.norm(p[:, :, None] - p[:, None, :], axis=0)[iu]
        return stats.spearmanr(d_in, d_out)[0]

    def test_distance_ranks_preserved(self):
        r = np.random.default_rng(1)
        scaled = r.standard_normal((4096, 200)) * r.uniform(0.5, 2.0, 200)
        low_rank = r.standard_normal((4096, 20)) @ r.standard_normal((20, 200))
        assert self._distance_rank_correlation(scaled) > 0.8
        assert self._distance_rank_correlation(low_rank) > 0.8

    def test_concentrated_distances_lose_rank(self):
        # isotropic points: distance spread is below the projection distortion
        m = np.random.default_rng(1).standard_normal((4096, 200))
        assert self._distance_rank_correlation(m) < 0.5

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            random_project(np.ones((3, 2)), 4, 0)


class TestSplit:
    def _ds(self, n, targets=None):
        ids = tuple(f"p{i}" for i in range(n))
        return PairedDataset(np.arange(n, dtype=float)[None, :], np.arange(n, dtype=float)[None, :],
                             ids, ids, targets or ids)

    def test_sizes_and_partition(self):
        ds = self._ds(10)
        train, test = split(ds, 0.8, seed=0)
        assert (len(train), len(test)) == (8, 2)
        assert sorted(train.ids + test.ids) == sorted(ds.ids)

    def test_deterministic(self):
        ds = self._ds(25)
        assert split(ds, 0.6, 3)[0].ids == split(ds, 0.6, 3)[0].ids
        assert split(ds, 0.6, 3)[0].ids != split(ds, 0.6, 4)[0].ids

    def test_groups_not_split(self):
        targets = tuple(f"t{i // 3}" for i in range(30))
        train, test = split(self._ds(30, targets), 0.5, seed=1)
        assert not set(train.target_ids) & set(test.target_ids)

    @pytest.mark.parametrize("frac", [0.0, 1.0, 0.01])
    def test_empty_side(self, frac):
        with pytest.raises(ValueError):
            split(self._ds(10), frac)


class TestEmbeddingFiles:
    def test_basic(self, tmp_path):
        ids, m = load_embeddings(_write(tmp_path / "e.txt", "a 1 2\nb 3 4\n"))
        assert ids == ["a", "b"]
        np.testing.assert_array_equal(m, [[1, 3], [2, 4]])

    def test_header(self, tmp_path):
        ids, m = load_embeddings(_write(tmp_path / "e.txt", "2 3\na 1 2 3\nb 4 5 6\n"))
        assert ids == ["a", "b"] and m.shape == (3, 2)

    def test_header_count_mismatch(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_embeddings(_write(tmp_path / "e.txt", "3 2\na 1 2\nb 3 4\n"))

    def test_ragged(self, tmp_path):
        path = _write(tmp_path / "e.txt", "a 1 2\nb 3 4\nc 5\n")
        with pytest.raises(FileFormatError, match=r"e\.txt:3:"):
            load_embeddings(path)

    def test_duplicate(self, tmp_path):
        with pytest.raises(FileFormatError, match=r":2:.*duplicate"):
            load_embeddings(_write(tmp_path / "e.txt", "a 1 2\na 3 4\n"))

    def test_non_numeric(self, tmp_path):
        with pytest.raises(FileFormatError, match="'x'"):
            load_embeddings(_write(tmp_path / "e.txt", "a 1 2\nb 3 x\n"))

    def test_non_finite(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_embeddings(_write(tmp_path / "e.txt", "a 1 nan\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_embeddings(_write(tmp_path / "e.txt", "\n\n"))

    def test_expected_dim(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_embeddings(_write(tmp_path / "e.txt", "a 1 2\n"), expected_dim=3)

    @pytest.mark.parametrize("header", [False, True])
    def test_round_trip(self, tmp_path, header):
        m = np.random.default_rng(0).standard_normal((5, 7)) * 100
        ids = [f"w{i}" for i in range(7)]
        save_embeddings(tmp_path / "e.txt", ids, m, header=header)
        got_ids, got = load_embeddings(tmp_path / "e.txt")
        assert got_ids == ids
        np.testing.assert_allclose(got, m, rtol=1e-6)

    def test_bad_token(self, tmp_path):
        with pytest.raises(ValueError):
            save_embeddings(tmp_path / "e.txt", ["a b"], np.ones((1, 1)))


class TestLexicon:
    @pytest.fixture
    def embeddings(self):
        src = (["s1", "s2", "s3"], np.arange(6.0).reshape(2, 3))
        tgt = (["t1", "t2", "t3"], -np.arange(6.0).reshape(2, 3))
        return src, tgt

    def test_three_entries(self, embeddings):
        res = pair_by_lexicon(*embeddings, [("s1", "t1"), ("s2", "t2"), ("s3", "t3")])
        assert len(res.dataset) == 3 and not res.skipped
        np.testing.assert_array_equal(res.dataset.source, -res.dataset.target)

    def test_unknown_skipped(self, embeddings):
        res = pair_by_lexicon(*embeddings, [("s1", "t1"), ("zz", "t2"), ("s2", "yy")])
        assert len(res.dataset) == 1
        assert res.skipped == [("zz", "t2"), ("s2", "yy")]

    def test_duplicates(self, embeddings):
        lex = [("s1", "t1"), ("s1", "t2"), ("s1", "t1"), ("s2", "t2"), ("s3", "t3")]
        dedup = pair_by_lexicon(*embeddings, lex)
        assert len(dedup.dataset) == 4 and dedup.duplicates == 1
        assert dedup.dataset.source_ids.count("s1") == 2
        kept = pair_by_lexicon(*embeddings, lex, dedupe=False)
        assert len(kept.dataset) == 5
        assert len(set(kept.dataset.ids)) == 5

    def test_nothing_resolves(self, embeddings):
        with pytest.raises(ValueError):
            pair_by_lexicon(*embeddings, [("x", "y")])

    def test_load(self, tmp_path):
        assert load_lexicon(_write(tmp_path / "l.txt", "a b\n\nc d\n")) == [("a", "b"), ("c", "d")]
        with pytest.raises(FileFormatError, match=":1:"):
            load_lexicon(_write(tmp_path / "bad.txt", "a b c\n"))


class TestManifest:
    def test_round_trip(self, tmp_path):
        write_manifest(tmp_path / "m.tsv", ["a", "b"], ["c"])
        m = read_manifest(tmp_path / "m.tsv")
        assert m == {"a": "train", "b": "train", "c": "test"}
        src = (["a", "b", "c"], np.eye(3))
        train, test = dataset_from_manifest(src, src, m)
        assert train.ids == ("a", "b") and test.ids == ("c",)

    def test_bad_split(self, tmp_path):
        with pytest.raises(FileFormatError):
            read_manifest(_write(tmp_path / "m.tsv", "id\tsplit\na\tdev\n"))

    def test_missing_id(self, tmp_path):
        src = (["a"], np.eye(1))
        with pytest.raises(ValueError):
            dataset_from_manifest(src, src, {"a": "train", "b": "test"})
