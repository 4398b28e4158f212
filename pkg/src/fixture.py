"""
Synthetic Fixture Corpus
Writes a small seeded corpus shaped like a sweetener debate: window A
(16 documents, 1984-1986) and window B (8 documents, 2004-2006).

Every document's content-word counts follow fixed document-support
patterns, so the vocabulary, cosine cells, derived threshold, edge and
isolate counts are known in closed form. The seed only changes token
order, plural forms, capitalization and stopword filler.

    python -m src.fixture corpus/ --seed 7
"""

import argparse
import datetime as dt
import logging
from collections import Counter
from pathlib import Path

import numpy as np

from src.models import RunConfig, WindowSpec
from src.textprep import stem_plural

logger = logging.getLogger(__name__)

DEFAULT_SEED = 7
FIXTURE_MIN_OCCURRENCES = 10

WINDOW_A = WindowSpec(label="A", start=dt.date(1984, 1, 1), end=dt.date(1986, 12, 31))
WINDOW_B = WindowSpec(label="B", start=dt.date(2004, 1, 1), end=dt.date(2006, 12, 31))

# window A: the health and regulation cluster (documents 1-8)
HEALTH_LEAD = {"aspartame": 7, "sweetener": 6, "food": 5, "sugar": 4, "product": 3}
HEALTH_WORDS = [
    "administration", "approved", "study", "brain", "seizure", "damage", "safety", "chemical",
    "consumer", "company", "scientist", "research", "drug", "additive", "label", "test",
    "evidence", "report", "official", "agency", "petition", "hearing", "amino", "acid", "phenylalanine",
]
# window A: the market cluster (documents 9-12)
MARKET_WORDS = [
    "cola", "bottler", "beverage", "calorie", "packet", "tabletop", "brand", "sale", "advertising",
    "industry", "manufacturer", "supplier", "price", "dollar", "share", "profit", "plant",
    "production", "patent", "monsanto", "searle", "nutrasweet", "equal", "aisle", "shelf",
]
# window A: diet on the outskirts (documents 13-16)
OUTSKIRT_WORDS = ["diet", "drink"]
# window A: one document from each cluster; never above the threshold
ISOLATES = {"headache": (1, 9, 13), "allergy": (2, 10, 14), "lawsuit": (3, 11, 15)}
# window A: below the cutoff (saccharin sits exactly on it)
RARE_WORDS = {"saccharin": range(1, 11), "market": range(9, 15), "cancer": range(5, 9)}

# window B: four clusters of two documents each, all tied to diet
B_CLUSTERS = [
    ["aspartame", "aspartame-infused", "sweetener", "food", "sugar", "product",
     "splenda", "sucralose", "market", "calorie"],
    ["obesity", "weight", "fitness", "gym", "nutrition", "lifestyle", "snack", "portion", "craving", "waistline"],
    ["soda", "cola", "bottle", "vending", "school", "student", "parent", "lunch", "cafeteria", "ban"],
    ["ballad", "song", "singer", "album", "lyric", "pop", "radio", "chart", "melody", "tune"],
]

FILLER = [
    "the", "of", "and", "a", "to", "in", "that", "it", "was", "for", "on", "as", "with", "by",
    "at", "from", "which", "this", "these", "their", "said", "also", "would", "been", "has",
    "have", "into", "such", "than", "there", "when", "while", "could", "should",
]


def window_a_counts() -> list[Counter]:
    """Content-word counts of the 16 window-A documents."""
    docs = [Counter() for _ in range(16)]
    for i in range(8):
        docs[i].update(HEALTH_LEAD)
        docs[i].update({w: 2 for w in HEALTH_WORDS})
    for i in range(8, 12):
        docs[i].update({w: 3 for w in MARKET_WORDS})
    for i in range(12, 16):
        docs[i].update({w: 3 for w in OUTSKIRT_WORDS})
    for word, numbers in ISOLATES.items():
        for n in numbers:
            docs[n - 1][word] += 4
    for word, numbers in RARE_WORDS.items():
        for n in numbers:
            docs[n - 1][word] += 1
    return docs


def window_b_counts() -> list[Counter]:
    """Content-word counts of the 8 window-B documents."""
    docs = [Counter({"diet": 3}) for _ in range(8)]
    for c, cluster in enumerate(B_CLUSTERS):
        for i in (2 * c, 2 * c + 1):
            docs[i].update({w: 6 for w in cluster})
    docs[4]["headache"] += 2
    return docs


def _surface(word: str, rng: np.random.Generator) -> str:
    # only plurals that stem back to the planted word
    if "-" not in word and rng.random() < 0.3 and stem_plural(word + "s") == word:
        return word + "s"
    return word


def render_document(counts: Counter, rng: np.random.Generator) -> str:
    """Shuffle content words among stopword filler into capitalized sentences."""
    words = [_surface(w, rng) for w in sorted(counts) for _ in range(counts[w])]
    filler = list(rng.choice(FILLER, size=len(words) * 2))
    numbers = [str(n) for n in rng.integers(1950, 2010, size=max(1, len(words) // 20))]
    tokens = [str(t) for t in rng.permutation(np.array(words + filler + numbers, dtype=object))]

    sentences = []
    while tokens:
        size = int(rng.integers(8, 15))
        sentence, tokens = tokens[:size], tokens[size:]
        sentence[0] = sentence[0][:1].upper() + sentence[0][1:]
        sentences.append(" ".join(sentence) + ".")

    lines, line = [], []
    for sentence in sentences:
        line.append(sentence)
        if len(line) == 4:
            lines.append(" ".join(line))
            line = []
    if line:
        lines.append(" ".join(line))
    return "\n\n".join(lines) + "\n"


def write_fixture_corpus(path: str | Path, seed: int = DEFAULT_SEED) -> list[Path]:
    """
    Write the fixture documents into `path` (created if needed).

    Filenames carry an ISO date prefix: `1984-01-15_sweet01.txt`.

    Returns:
        The written files, A documents first.
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    plan = []
    for i, counts in enumerate(window_a_counts(), start=1):
        day = dt.date(1984, 1, 15) + dt.timedelta(days=65 * (i - 1))
        plan.append((f"{day.isoformat()}_sweet{i:02d}.txt", counts))
    for j, counts in enumerate(window_b_counts(), start=1):
        day = dt.date(2004, 2, 1) + dt.timedelta(days=120 * (j - 1))
        plan.append((f"{day.isoformat()}_diet{j:02d}.txt", counts))

    written = []
    for name, counts in plan:
        out = directory / name
        out.write_text(render_document(counts, rng), encoding="utf-8")
        written.append(out)
    logger.info(f"Wrote {len(written)} fixture documents to {directory}")
    return written


def fixture_config(input_dir: str | Path, out_dir: str | Path = "out", **overrides) -> RunConfig:
    """RunConfig for the fixture: windows A and B, min_occurrences 10."""
    values = {
        "input_dir": str(input_dir),
        "out_dir": str(out_dir),
        "min_occurrences": FIXTURE_MIN_OCCURRENCES,
        "windows": [WINDOW_A, WINDOW_B],
    }
    values.update(overrides)
    return RunConfig(**values)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Write the synthetic fixture corpus.")
    parser.add_argument("directory", help="Output directory for the .txt files.")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--config", help="Also write a matching JSON config here.")
    args = parser.parse_args()

    files = write_fixture_corpus(args.directory, seed=args.seed)
    if args.config:
        config = fixture_config(args.directory)
        Path(args.config).write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    print(f"{len(files)} documents written to {args.directory}")
