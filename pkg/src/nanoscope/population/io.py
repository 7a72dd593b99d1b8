"""Reading and writing populations.

On disk a population is a directory:

    catalog.csv    header ``interest_id,name``
    users.jsonl    one JSON object per line:
                   {"user_id": int, "gender": "m"|"f"|"u", "age": int|null,
                    "country": "XX"|null, "interests": [int, ...]}
    manifest.json  counts, provenance, and a content digest

Serialization is byte-deterministic for a given population, so identical
flags and seeds reproduce identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from . import (
    GENDER_CODES,
    GENDER_TO_CODE,
    GENDERS,
    MIN_AGE_YEARS,
    Catalog,
    GeneratedProvenance,
    IngestedProvenance,
    Population,
    Provenance,
)

CATALOG_FILE = "catalog.csv"
USERS_FILE = "users.jsonl"
MANIFEST_FILE = "manifest.json"
FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def catalog_to_csv(catalog: Catalog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["interest_id", "name"])
    for i in range(len(catalog)):
        writer.writerow([int(catalog.interest_ids[i]), catalog.names[i]])
    return buf.getvalue()


def users_to_jsonl(pop: Population) -> str:
    lines = []
    ids = pop.catalog.interest_ids
    for row in range(pop.n_users):
        age = int(pop.ages[row])
        country = int(pop.countries[row])
        record = {
            "user_id": int(pop.user_ids[row]),
            "gender": GENDER_TO_CODE[GENDERS[pop.genders[row]]],
            "age": age if age >= 0 else None,
            "country": pop.country_labels[country] if country >= 0 else None,
            "interests": [int(i) for i in ids[pop.row_positions(row)]],
        }
        lines.append(json.dumps(record, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def content_digest(catalog_text: str, users_text: str) -> str:
    h = hashlib.sha256()
    h.update(catalog_text.encode())
    h.update(users_text.encode())
    return h.hexdigest()


def _provenance_dict(p: Provenance) -> dict:
    if isinstance(p, GeneratedProvenance):
        return {"kind": "generated", "seed": p.seed, "config_digest": p.config_digest}
    return {"kind": "ingested", "source_digest": p.source_digest}


def _provenance_from_dict(d: dict) -> Provenance:
    if d.get("kind") == "generated":
        return GeneratedProvenance(seed=int(d["seed"]), config_digest=str(d["config_digest"]))
    if d.get("kind") == "ingested":
        return IngestedProvenance(source_digest=str(d["source_digest"]))
    raise DataFormatError(f"unknown provenance kind {d.get('kind')!r}")


def save_population(pop: Population, out_dir: str | Path) -> str:
    """Write the population directory; returns the content digest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    catalog_text = catalog_to_csv(pop.catalog)
    users_text = users_to_jsonl(pop)
    digest = content_digest(catalog_text, users_text)
    manifest = {
        "format_version": FORMAT_VERSION,
        "n_users": pop.n_users,
        "n_interests": pop.n_interests,
        "total_occurrences": pop.total_occurrences,
        "digest": digest,
        "provenance": _provenance_dict(pop.provenance),
    }
    (out / CATALOG_FILE).write_text(catalog_text)
    (out / USERS_FILE).write_text(users_text)
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return digest


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def read_catalog_csv(path: str | Path) -> tuple[np.ndarray, tuple[str, ...]]:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"catalog file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty catalog file") from None
        if [c.strip() for c in header[:2]] != ["interest_id", "name"]:
            raise DataFormatError(f"{path}: expected header 'interest_id,name', got {header!r}")
        ids: list[int] = []
        names: list[str] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) < 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'interest_id,name'")
            try:
                iid = int(rec[0])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad interest_id {rec[0]!r}") from None
            if iid < 0:
                raise DataFormatError(f"{path}:{lineno}: interest_id must be non-negative")
            ids.append(iid)
            names.append(rec[1])
    if not ids:
        raise DataFormatError(f"{path}: catalog has no interests")
    return np.asarray(ids, dtype=np.int64), tuple(names)


def _parse_user_line(line: str, lineno: int, source: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{source}:{lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise DataFormatError(f"{source}:{lineno}: expected a JSON object")
    for key in ("user_id", "gender", "age", "country", "interests"):
        if key not in record:
            raise DataFormatError(f"{source}:{lineno}: missing field {key!r}")
    if not isinstance(record["user_id"], int) or isinstance(record["user_id"], bool):
        raise DataFormatError(f"{source}:{lineno}: user_id must be an integer")
    if record["user_id"] < 0:
        raise DataFormatError(f"{source}:{lineno}: user_id must be non-negative")
    if record["gender"] not in GENDER_CODES:
        raise DataFormatError(f"{source}:{lineno}: gender must be one of m/f/u")
    age = record["age"]
    if age is not None:
        if not isinstance(age, int) or isinstance(age, bool):
            raise DataFormatError(f"{source}:{lineno}: age must be an integer or null")
        if age < MIN_AGE_YEARS:
            raise DataFormatError(
                f"{source}:{lineno}: age {age} below the platform minimum of {MIN_AGE_YEARS}"
            )
    country = record["country"]
    if country is not None:
        if (not isinstance(country, str) or len(country) != 2
                or not country.isalpha() or not country.isupper()):
            raise DataFormatError(f"{source}:{lineno}: country must be a 2-letter uppercase code")
    interests = record["interests"]
    if not isinstance(interests, list) or not interests:
        raise DataFormatError(f"{source}:{lineno}: interests must be a non-empty list")
    for i in interests:
        if not isinstance(i, int) or isinstance(i, bool):
            raise DataFormatError(f"{source}:{lineno}: interests must be integers")
    if len(set(interests)) != len(interests):
        raise DataFormatError(f"{source}:{lineno}: duplicate interests in record")
    return record


def ingest(users_path: str | Path, catalog_path: str | Path,
           provenance: Provenance | None = None) -> Population:
    """Build a population from external files, recomputing all audiences.

    Any audience counts present in the source are ignored; the catalog's
    ``global_audience`` is always the realized count over the users file.
    """
    interest_ids, names = read_catalog_csv(catalog_path)
    position = {int(v): i for i, v in enumerate(interest_ids)}

    users_path = Path(users_path)
    if not users_path.exists():
        raise DataFormatError(f"users file not found: {users_path}")
    source = str(users_path)

    user_ids: list[int] = []
    genders: list[int] = []
    ages: list[int] = []
    country_of_user: list[str | None] = []
    rows: list[np.ndarray] = []
    seen: set[int] = set()

    with users_path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = _parse_user_line(line, lineno, source)
            uid = record["user_id"]
            if uid in seen:
                raise DataFormatError(f"{source}:{lineno}: duplicate user_id {uid}")
            seen.add(uid)
            positions = []
            for iid in record["interests"]:
                if iid not in position:
                    raise DataFormatError(f"{source}:{lineno}: unknown interest {iid}")
                positions.append(position[iid])
            user_ids.append(uid)
            genders.append(GENDERS.index(GENDER_CODES[record["gender"]]))
            ages.append(record["age"] if record["age"] is not None else -1)
            country_of_user.append(record["country"])
            rows.append(np.sort(np.asarray(positions, dtype=np.int32)))

    if not user_ids:
        raise DataFormatError(f"{source}: no user records")

    labels = tuple(sorted({c for c in country_of_user if c is not None}))
    label_pos = {c: i for i, c in enumerate(labels)}
    countries = np.asarray([label_pos[c] if c is not None else -1 for c in country_of_user],
                           dtype=np.int16)

    counts = np.asarray([r.size for r in rows], dtype=np.int64)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    indices = np.concatenate(rows) if rows else np.empty(0, dtype=np.int32)
    audiences = np.bincount(indices, minlength=interest_ids.size)
    catalog = Catalog(interest_ids, names, audiences)

    if provenance is None:
        h = hashlib.sha256()
        h.update(Path(catalog_path).read_bytes())
        h.update(users_path.read_bytes())
        provenance = IngestedProvenance(source_digest=h.hexdigest())

    return Population(
        catalog=catalog,
        user_ids=np.asarray(user_ids, dtype=np.int64),
        genders=np.asarray(genders, dtype=np.int8),
        ages=np.asarray(ages, dtype=np.int16),
        countries=countries,
        country_labels=labels,
        indptr=indptr,
        indices=indices.astype(np.int32),
        provenance=provenance,
    )


def load_population(pop_dir: str | Path) -> Population:
    """Load a population directory written by ``save_population``."""
    pop_dir = Path(pop_dir)
    manifest_path = pop_dir / MANIFEST_FILE
    provenance: Provenance | None = None
    if manifest_path.exists():
        try:
            manifest = json.loads(manifest_path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{manifest_path}: invalid JSON: {exc.msg}") from None
        provenance = _provenance_from_dict(manifest.get("provenance", {}))
    return ingest(pop_dir / USERS_FILE, pop_dir / CATALOG_FILE, provenance=provenance)


def population_digest(pop: Population) -> str:
    """Content digest of the population's canonical serialization."""
    return content_digest(catalog_to_csv(pop.catalog), users_to_jsonl(pop))
