"""Paired datasets: synthetic generation, embedding files, lexicon pairing, splits.

Embedding text format: one object per line, a token followed by
whitespace-separated floats. An optional first line ``"N D"`` (exactly two
integer fields) is a header and is skipped after validation.
"""
import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, FileFormatError
from .regression import as_data_matrix


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Column-aligned source and target matrices.

    ``ids`` names each pair. ``source_ids``/``target_ids`` name the objects
    in each column; they default to ``ids`` and differ when pairs come from a
    lexicon, where one source token can have several gold targets.
    """

    source: np.ndarray
    target: np.ndarray
    ids: tuple
    source_ids: tuple = None
    target_ids: tuple = None

    def __post_init__(self):
        source = as_data_matrix(self.source, "source")
        target = as_data_matrix(self.target, "target")
        ids = tuple(self.ids)
        if source.shape[1] != target.shape[1]:
            raise DimensionMismatch(
                f"source has {source.shape[1]} objects but target has {target.shape[1]}"
            )
        if len(ids) != source.shape[1]:
            raise DimensionMismatch(f"{len(ids)} ids for {source.shape[1]} pairs")
        if len(set(ids)) != len(ids):
            dup = next(i for i, c in Counter(ids).items() if c > 1)
            raise ValueError(f"duplicate pair id {dup!r}")
        src_ids = ids if self.source_ids is None else tuple(self.source_ids)
        tgt_ids = ids if self.target_ids is None else tuple(self.target_ids)
        if len(src_ids) != len(ids) or len(tgt_ids) != len(ids):
            raise DimensionMismatch("source_ids/target_ids must have one entry per pair")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "source_ids", src_ids)
        object.__setattr__(self, "target_ids", tgt_ids)

    def __len__(self):
        return len(self.ids)

    def subset(self, columns):
        columns = np.asarray(columns, dtype=np.int64)
        return PairedDataset(
            self.source[:, columns],
            self.target[:, columns],
            tuple(self.ids[i] for i in columns),
            tuple(self.source_ids[i] for i in columns),
            tuple(self.target_ids[i] for i in columns),
        )

    def digest(self):
        h = hashlib.sha256()
        for arr in (self.source, self.target):
            h.update(str(arr.shape).encode())
            h.update(np.ascontiguousarray(arr).tobytes())
        for names in (self.ids, self.source_ids, self.target_ids):
            h.update("\x1f".join(map(str, names)).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class SyntheticConfig:
    num_pairs: int = 2000
    latent_dim: int = 1000
    source_dim: int = 100
    target_dim: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("num_pairs", "latent_dim", "source_dim", "target_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.source_dim > self.latent_dim or self.target_dim > self.latent_dim:
            raise ValueError(
                f"projected dimensions ({self.source_dim}, {self.target_dim}) "
                f"must not exceed latent_dim ({self.latent_dim})"
            )


def generate_synthetic(cfg):
    """Pairs ``(R_X z, R_Y z)`` from standard normal latent vectors ``z``.

    ``R_X`` and ``R_Y`` have i.i.d. entries uniform on ``[-1, 1]``.
    """
    latent_ss, rx_ss, ry_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    Z = np.random.default_rng(latent_ss).standard_normal((cfg.latent_dim, cfg.num_pairs))
    RX = np.random.default_rng(rx_ss).uniform(-1.0, 1.0, (cfg.source_dim, cfg.latent_dim))
    RY = np.random.default_rng(ry_ss).uniform(-1.0, 1.0, (cfg.target_dim, cfg.latent_dim))
    width = len(str(cfg.num_pairs - 1))
    ids = tuple(f"p{i:0{width}d}" for i in range(cfg.num_pairs))
    return PairedDataset(RX @ Z, RY @ Z, ids)


def random_project(m, out_dim, seed, projection=None):
    """``R @ m`` with ``R`` (``out_dim x row_dim``) uniform on ``[-1, 1]``.

    ``projection`` overrides ``R`` (for tests).
    """
    m = as_data_matrix(m)
    if not 1 <= out_dim <= m.shape[0]:
        raise ValueError(f"out_dim must be in [1, {m.shape[0]}], got {out_dim}")
    if projection is None:
        projection = np.random.default_rng(seed).uniform(-1.0, 1.0, (out_dim, m.shape[0]))
    projection = as_data_matrix(projection, "projection")
    if projection.shape != (out_dim, m.shape[0]):
        raise DimensionMismatch(f"projection must be {(out_dim, m.shape[0])}, got {projection.shape}")
    return projection @ m


def split(ds, train_fraction=0.8, seed=0):
    """Random train/test partition with no target shared across the two sides.

    Pairs are shuffled and whole target groups (all pairs sharing a
    ``target_id``) are assigned to train until it holds ``floor(f * n)``
    pairs. When every target id is distinct the sizes are exact.
    """
    n = len(ds)
    if n < 2:
        raise ValueError("need at least two pairs to split")
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    want = math.floor(train_fraction * n)
    if want < 1 or want >= n:
        raise ValueError(f"train_fraction {train_fraction} leaves one side of {n} pairs empty")
    perm = np.random.default_rng(seed).permutation(n)
    groups = {}
    for i in perm:
        groups.setdefault(ds.target_ids[i], []).append(int(i))
    train, test = [], []
    for members in groups.values():
        (train if len(train) < want else test).extend(members)
    if not test:
        raise ValueError("split left the test side empty; lower train_fraction")
    train_ds, test_ds = ds.subset(train), ds.subset(test)
    assert not set(train_ds.target_ids) & set(test_ds.target_ids)
    return train_ds, test_ds


# --- embedding files ---------------------------------------------------------


def _is_header(fields):
    return len(fields) == 2 and all(f.lstrip("+").isdigit() for f in fields)


def load_embeddings(path, expected_dim=None):
    """Read an embedding text file into ``(ids, matrix)``; one column per token."""
    path = Path(path)
    ids, rows = [], []
    seen = {}
    dim = expected_dim
    header_count = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and _is_header(fields):
                header_count, header_dim = int(fields[0]), int(fields[1])
                if dim is not None and header_dim != dim:
                    raise FileFormatError(path, lineno, f"header declares dimension {header_dim}, expected {dim}")
                dim = header_dim
                continue
            token, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise FileFormatError(path, lineno, f"expected {dim} values, found {len(values)}")
            if token in seen:
                raise FileFormatError(path, lineno, f"duplicate token {token!r} (first on line {seen[token]})")
            try:
                row = [float(v) for v in values]
            except ValueError:
                bad = next(v for v in values if not _is_float(v))
                raise FileFormatError(path, lineno, f"non-numeric field {bad!r}") from None
            if not all(math.isfinite(v) for v in row):
                raise FileFormatError(path, lineno, "non-finite value")
            seen[token] = lineno
            ids.append(token)
            rows.append(row)
    if not ids:
        raise FileFormatError(path, None, "no embeddings found")
    if dim == 0:
        raise FileFormatError(path, None, "embeddings have no values")
    if header_count is not None and header_count != len(ids):
        raise FileFormatError(path, 1, f"header declares {header_count} rows, found {len(ids)}")
    return ids, np.array(rows, dtype=np.float64).T


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def save_embeddings(path, ids, matrix, precision=9, header=False):
    """Write ``matrix`` (one column per id) in the embedding text format."""
    matrix = as_data_matrix(matrix)
    if len(ids) != matrix.shape[1]:
        raise DimensionMismatch(f"{len(ids)} ids for {matrix.shape[1]} columns")
    fmt = f"%.{precision}g"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"{matrix.shape[1]} {matrix.shape[0]}\n")
        for token, col in zip(ids, matrix.T):
            if any(c.isspace() for c in str(token)) or not str(token):
                raise ValueError(f"token {token!r} is empty or contains whitespace")
            fh.write(str(token) + " " + " ".join(fmt % v for v in col) + "\n")


def load_lexicon(path):
    """Read ``src_token tgt_token`` lines."""
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise FileFormatError(path, lineno, f"expected 2 tokens, found {len(fields)}")
            pairs.append((fields[0], fields[1]))
    return pairs


@dataclass
class LexiconPairing:
    dataset: PairedDataset
    skipped: list = field(default_factory=list)
    duplicates: int = 0


def pair_by_lexicon(src, tgt, lexicon, dedupe=True):
    """Align source and target embeddings through gold translation pairs.

    ``src`` and ``tgt`` are ``(ids, matrix)`` as returned by
    :func:`load_embeddings`. Entries with a token missing on either side are
    skipped and listed in the result. A source with several gold targets
    yields one pair per target.
    """
    src_ids, src_mat = src
    tgt_ids, tgt_mat = tgt
    src_pos = {t: i for i, t in enumerate(src_ids)}
    tgt_pos = {t: i for i, t in enumerate(tgt_ids)}
    kept, skipped, seen = [], [], set()
    duplicates = 0
    for s, t in lexicon:
        if s not in src_pos or t not in tgt_pos:
            skipped.append((s, t))
            continue
        if (s, t) in seen:
            duplicates += 1
            if dedupe:
                continue
        seen.add((s, t))
        kept.append((s, t))
    if not kept:
        raise ValueError("no lexicon entry resolves in both embedding sets")
    ids, count = [], Counter()
    for s, t in kept:
        base = f"{s}->{t}"
        ids.append(base if count[base] == 0 else f"{base}#{count[base]}")
        count[base] += 1
    ds = PairedDataset(
        src_mat[:, [src_pos[s] for s, _ in kept]],
        tgt_mat[:, [tgt_pos[t] for _, t in kept]],
        tuple(ids),
        tuple(s for s, _ in kept),
        tuple(t for _, t in kept),
    )
    return LexiconPairing(ds, skipped, duplicates)


# --- manifests ---------------------------------------------------------------


def write_manifest(path, train_ids, test_ids):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tsplit\n")
        for i in train_ids:
            fh.write(f"{i}\ttrain\n")
        for i in test_ids:
            fh.write(f"{i}\ttest\n")


def read_manifest(path):
    """Return ``{id: split}`` from an ``id<TAB>split`` file."""
    path = Path(path)
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or (lineno == 1 and line == "id\tsplit"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or fields[1] not in ("train", "test"):
                raise FileFormatError(path, lineno, "expected '<id>\\t<train|test>'")
            if fields[0] in out:
                raise FileFormatError(path, lineno, f"duplicate id {fields[0]!r}")
            out[fields[0]] = fields[1]
    return out


def dataset_from_manifest(source, target, manifest):
    """Build train/test datasets from two embedding sets keyed by shared pair ids."""
    src_ids, src_mat = source
    tgt_ids, tgt_mat = target
    src_pos = {t: i for i, t in enumerate(src_ids)}
    tgt_pos = {t: i for i, t in enumerate(tgt_ids)}
    parts = {}
    for side in ("train", "test"):
        ids = [i for i, s in manifest.items() if s == side]
        missing = [i for i in ids if i not in src_pos or i not in tgt_pos]
        if missing:
            raise ValueError(f"{len(missing)} manifest ids missing from embeddings, e.g. {missing[0]!r}")
        if not ids:
            raise ValueError(f"manifest has no {side} pairs")
        parts[side] = PairedDataset(
            src_mat[:, [src_pos[i] for i in ids]],
            tgt_mat[:, [tgt_pos[i] for i in ids]],
            tuple(ids),
        )
    return parts["train"], parts["test"]
