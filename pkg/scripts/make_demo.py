#!/usr/bin/env python3
"""Regenerate the bundled offline demo dataset under demo/.

The demo exercises the full pipeline without network access: ten two-passage
examples with reference questions (calibration sample with step counts
5x2, 3x3, 2x1 -> expected complexity 2), four candidate systems over the
first five examples, scripted mock responses for every prompt, and a small
three-rater rating file.

System design (per-item chain-of-thought verdict / step count / answer):
  group1  all natural and answerable; step counts 2,1,3,2,1 and two partial
          answers -> mean composite ~0.864
  group2  natural, answerable, but single-hop (1 step vs expected 2) -> 0.833
  group3  four of five flagged (non-question or unnatural) -> 0.178
  group4  natural but answers mismatch the gold span -> 0.0
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DEMO = ROOT / "demo"

EXAMPLES = [
    {
        "id": "d01",
        "passages": [
            "The Araluen Point lighthouse was completed in 1888 on the cliffs above Mereton Bay. "
            "Its rotating lens was shipped from Glasgow and assembled on site by a crew of twelve.",
            "Edwin Carrow, a marine engineer born in Dundee, designed several lighthouse lenses in the 1880s, "
            "including the rotating lens installed at Araluen Point.",
        ],
        "answer": "Edwin Carrow",
        "clues": ["rotating lens", "Mereton Bay"],
        "reference_question": "Which Dundee-born marine engineer designed the rotating lens installed at the "
        "lighthouse completed in 1888 above Mereton Bay?",
        "ref_steps": 2,
    },
    {
        "id": "d02",
        "passages": [
            "The Quistell River rises in the Harlan Hills and flows south for 210 kilometres before joining "
            "the Verena at the town of Double Ford.",
            "Double Ford grew around a stone bridge built in 1740; the bridge carried the old salt road "
            "across the Quistell River.",
        ],
        "answer": "1740",
        "clues": ["stone bridge", "Double Ford"],
        "reference_question": "In what year was the stone bridge built in the town where the Quistell River "
        "joins the Verena?",
        "ref_steps": 2,
    },
    {
        "id": "d03",
        "passages": [
            "The Teatro Salvina opened in 1902 in the port city of Ostreval and quickly became known for "
            "premiering contemporary works.",
            "Composer Lidia Ferrant wrote her only opera, The Glass Harbor, for the opening season of the "
            "Teatro Salvina.",
        ],
        "answer": "Lidia Ferrant",
        "clues": ["opening season", "Ostreval"],
        "reference_question": "Which composer wrote an opera for the opening season of the theatre that opened "
        "in Ostreval in 1902?",
        "ref_steps": 2,
    },
    {
        "id": "d04",
        "passages": [
            "North of the fishing village of Tarn Hollow stands the Glass Harbor Lighthouse, raised in 1861 "
            "after three winters of wrecks.",
            "The painter Marta Ellwood spent a decade sketching coastal towers; her best-known series depicts "
            "the lighthouse north of Tarn Hollow.",
        ],
        "answer": "the Glass Harbor Lighthouse",
        "clues": ["coastal towers", "Tarn Hollow"],
        "reference_question": "Which structure raised in 1861 is depicted in Marta Ellwood's best-known series "
        "of paintings?",
        "ref_steps": 2,
    },
    {
        "id": "d05",
        "passages": [
            "The courtyard of Welkin Abbey is shaded by a single silver maple planted by the abbey's first "
            "librarian.",
            "Abbey records credit librarian Tobias Wren with planting a tree in the courtyard in 1704, chosen "
            "for its pale autumn leaves.",
        ],
        "answer": "silver maple",
        "clues": ["courtyard", "Welkin Abbey"],
        "reference_question": "What kind of tree did the first librarian of Welkin Abbey plant in its "
        "courtyard?",
        "ref_steps": 2,
    },
    {
        "id": "d06",
        "passages": [
            "Astronomer Pell Varga catalogued faint periodic comets from the Ridgemont Observatory between "
            "1911 and 1938.",
            "Comet Brenna, first recorded at Ridgemont in 1924, returns every 41 years and was named after "
            "the observatory's founder.",
        ],
        "answer": "41 years",
        "reference_question": "How often does the comet first recorded at the observatory where Pell Varga "
        "worked return?",
        "ref_steps": 3,
    },
    {
        "id": "d07",
        "passages": [
            "The Corvasse Glacier feeds three alpine lakes, the largest of which is Lake Imelda at 2,140 "
            "metres altitude.",
            "A mountain refuge on the shore of Lake Imelda has hosted climbers since 1897 and sleeps forty "
            "guests.",
        ],
        "answer": "forty guests",
        "reference_question": "How many guests can the refuge on the largest lake fed by the Corvasse Glacier "
        "sleep?",
        "ref_steps": 3,
    },
    {
        "id": "d08",
        "passages": [
            "The novelist Ida Kestrel set her trilogy in the marsh country of Ferrow, basing the town of "
            "Saltwick on her childhood home.",
            "Saltwick's only museum, opened in 1976, is devoted to eel fishing and draws most of its visitors "
            "from readers of Kestrel's trilogy.",
        ],
        "answer": "eel fishing",
        "reference_question": "What is the museum devoted to in the town that Ida Kestrel based on her "
        "childhood home?",
        "ref_steps": 3,
    },
    {
        "id": "d09",
        "passages": [
            "Harrow's Reach is a tidal island connected to the mainland by a causeway passable for six hours "
            "a day.",
            "The island's chapel bell, cast in 1602, is rung whenever the causeway opens.",
        ],
        "answer": "1602",
        "reference_question": "In what year was the chapel bell on Harrow's Reach cast?",
        "ref_steps": 1,
    },
    {
        "id": "d10",
        "passages": [
            "The dye works at Cinder Lane produced a violet pigment prized by mapmakers until the works "
            "closed in 1851.",
            "Mapmaker Oren Dunmore bought the final batch of Cinder Lane violet for his atlas of the western "
            "counties.",
        ],
        "answer": "Oren Dunmore",
        "reference_question": "Which mapmaker bought the final batch of violet pigment from the Cinder Lane "
        "dye works?",
        "ref_steps": 1,
    },
]

# (question text, verdict, steps, answer) per system and example d01..d05.
# verdict: "ok" emits a well-formed trace; "notq" / "unnatural" emit flagged
# section-1 responses.
CANDIDATES = {
    "group1": [
        ("Which marine engineer from Dundee designed the rotating lens for the lighthouse above Mereton Bay?",
         "ok", 2, "Edwin Carrow"),
        ("What year saw the building of the stone bridge at the town where the Quistell meets the Verena?",
         "ok", 1, "1740"),
        ("Who composed the opera premiered in the opening season of Ostreval's theatre of 1902?",
         "ok", 3, "Lidia Ferrant"),
        ("Which 1861 structure features in the best-known painting series of Marta Ellwood?",
         "ok", 2, "Glass Harbor"),
        ("Which tree shades the courtyard planted by Welkin Abbey's first librarian?",
         "ok", 1, "silver birch"),
    ],
    "group2": [
        ("Who designed several lighthouse lenses in the 1880s?", "ok", 1, "Edwin Carrow"),
        ("When was the stone bridge at Double Ford built?", "ok", 1, "1740"),
        ("Who wrote the opera The Glass Harbor?", "ok", 1, "Lidia Ferrant"),
        ("What stands north of Tarn Hollow?", "ok", 1, "the Glass Harbor Lighthouse"),
        ("What kind of tree shades the courtyard of Welkin Abbey?", "ok", 1, "silver maple"),
    ],
    "group3": [
        ("The rotating lens above Mereton Bay was designed by a marine engineer born in Dundee.",
         "notq", 0, None),
        ("The stone bridge at Double Ford carried the old salt road across the Quistell River.",
         "notq", 0, None),
        ("Which opening season Ostreval theatre composer opera the wrote?", "unnatural", 0, None),
        ("Coastal towers Tarn Hollow lighthouse painter series depicts raised 1861?", "unnatural", 0, None),
        ("Which clue words describe the tree in the courtyard of Welkin Abbey?", "ok", 3, "silver maple"),
    ],
    "group4": [
        ("What did the fishermen of Tarn Hollow trade for lamp oil?", "ok", 2, "a basket of river pearls"),
        ("Who captained the ferry across Mereton Bay in 1903?", "ok", 2, "Captain Mirelle Voss"),
        ("What drives the tides in the marsh country of Ferrow?", "ok", 2, "the northern trade winds"),
        ("Where did Oren Dunmore store his unsold atlases?", "ok", 2, "an abandoned tin mine"),
        ("What lies behind the chapel on Harrow's Reach?", "ok", 2, "the old mill pond"),
    ],
}

# Direct-eval rubric ratings per system/example: (naturalness, answerability, complexity).
DIRECT_RATINGS = {
    "group1": [(2, 2, 2), (2, 2, 1), (2, 2, 2), (2, 1, 2), (2, 1, 1)],
    "group2": [(2, 2, 1), (2, 2, 1), (2, 2, 1), (2, 2, 1), (2, 2, 1)],
    "group3": [(0, 1, 1), (0, 1, 1), (0, 0, 1), (0, 0, 1), (2, 2, 2)],
    "group4": [(2, 0, 1), (2, 0, 1), (2, 0, 1), (2, 0, 1), (2, 0, 1)],
}

# Human ratings: per system/example, three raters' (n, a, c) triples.
HUMAN_RATINGS = {
    "group1": [
        [(2, 2, 2), (2, 2, 2), (2, 2, 2)],
        [(2, 2, 1), (2, 2, 2), (2, 2, 1)],
        [(2, 2, 2), (2, 2, 2), (1, 2, 2)],
        [(2, 1, 2), (2, 2, 2), (2, 2, 2)],
        [(2, 1, 1), (2, 2, 1), (2, 1, 2)],
    ],
    "group2": [
        [(2, 2, 1), (2, 2, 1), (2, 2, 1)],
        [(2, 2, 1), (1, 2, 1), (2, 2, 1)],
        [(2, 2, 1), (2, 2, 1), (2, 1, 1)],
        [(2, 2, 1), (2, 2, 1), (2, 2, 0)],
        [(2, 2, 1), (2, 2, 1), (1, 2, 1)],
    ],
    "group3": [
        [(0, 1, 1), (0, 1, 1), (1, 1, 1)],
        [(0, 1, 1), (0, 0, 1), (0, 1, 1)],
        [(0, 0, 1), (0, 1, 1), (0, 0, 0)],
        [(0, 0, 1), (0, 0, 1), (1, 0, 1)],
        [(2, 2, 2), (2, 2, 1), (2, 2, 2)],
    ],
    "group4": [
        [(2, 0, 1), (2, 0, 1), (2, 0, 0)],
        [(2, 0, 1), (1, 0, 1), (2, 0, 1)],
        [(2, 0, 0), (2, 0, 1), (2, 0, 1)],
        [(2, 0, 1), (2, 0, 1), (1, 0, 1)],
        [(2, 0, 1), (2, 0, 0), (2, 0, 1)],
    ],
}

STEP_CLAUSES = [
    "Passage 1 names the key entity tied to the asked-about detail.",
    "Passage 2 links that entity to the span the question targets.",
    "Combining both passages isolates the exact span.",
]


def cot_ok_response(steps: int, answer: str) -> str:
    step_lines = "\n".join(f"Step {i + 1}: {STEP_CLAUSES[min(i, len(STEP_CLAUSES) - 1)]}" for i in range(steps))
    return (
        "1. The sentence is a question; it asks for a specific span and ends with a question mark.\n"
        "2. Step by step reasoning:\n"
        f"{step_lines}\n"
        f"3. Answer: <ans> {answer} <ans>\n"
    )


def cot_flagged_response(kind: str) -> str:
    if kind == "notq":
        return "1. not a question\n"
    return "1. Question unnatural. The objective is unclear and the phrasing is garbled.\n"


def direct_response(ratings: tuple[int, int, int]) -> str:
    n, a, c = ratings
    return f"Naturalness: {n}\nAnswerability: {a}\nComplexity: {c}\n"


def main() -> None:
    DEMO.mkdir(exist_ok=True)

    with (DEMO / "examples.jsonl").open("w", encoding="utf-8") as fh:
        for ex in EXAMPLES:
            record = {
                "id": ex["id"],
                "passages": ex["passages"],
                "answer": ex["answer"],
                "reference_question": ex["reference_question"],
                "dataset_id": "demo",
            }
            if "clues" in ex:
                record["clues"] = ex["clues"]
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    with (DEMO / "candidates.jsonl").open("w", encoding="utf-8") as fh:
        for system, items in CANDIDATES.items():
            for ex, (text, _, _, _) in zip(EXAMPLES[:5], items):
                fh.write(json.dumps(
                    {"example_id": ex["id"], "system": system, "text": text}, ensure_ascii=False) + "\n")

    manifest = []
    for ex in EXAMPLES:  # calibration / reference-override traces
        manifest.append({
            "contains": f"Sentence: {ex['reference_question']}",
            "response": cot_ok_response(ex["ref_steps"], ex["answer"]),
        })
    for system, items in CANDIDATES.items():
        for ex, (text, verdict, steps, answer) in zip(EXAMPLES[:5], items):
            response = cot_ok_response(steps, answer) if verdict == "ok" else cot_flagged_response(verdict)
            manifest.append({"contains": f"Sentence: {text}", "response": response})
    for system, items in CANDIDATES.items():
        for (text, _, _, _), ratings in zip(items, DIRECT_RATINGS[system]):
            manifest.append({
                "contains": f"Candidate question: {text}",
                "response": direct_response(ratings),
            })
    (DEMO / "mock_manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    with (DEMO / "ratings.jsonl").open("w", encoding="utf-8") as fh:
        for system, items in HUMAN_RATINGS.items():
            for ex, raters in zip(EXAMPLES[:5], items):
                for idx, (n, a, c) in enumerate(raters, start=1):
                    fh.write(json.dumps({
                        "example_id": ex["id"], "system": system, "rater_id": f"r{idx}",
                        "naturalness": n, "answerability": a, "complexity": c,
                    }) + "\n")

    (DEMO / "config.json").write_text(json.dumps({
        "provider": "mock",
        "model": "mock-demo",
        "mock_fixtures": str(DEMO / "mock_manifest.json"),
        "cache_root": ".qgeval_cache",
        "runs": 3,
        "parallelism": 4,
        "dataset_id": "demo",
        "expected_passages": 2,
    }, indent=2) + "\n", encoding="utf-8")

    print(f"wrote demo dataset under {DEMO}")


if __name__ == "__main__":
    main()
