#!/usr/bin/env python3
# Copyright 2026 The forge Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled mini source manifests.

The records are synthetic. Each source has its own phrasing so a lexical
model can tell the classes apart, and every text used as a negative parent
carries at least one lexicon keyword that is also one of the image tags.

    python3 generate.py [outdir]
"""

import json
import random
import sys
from pathlib import Path

N = 64
rng = random.Random(20261017)

PEOPLE = ["man", "woman", "boy", "girl", "father", "mother", "king", "queen"]
SIZES = ["tall", "small", "large", "big", "little", "short"]
COLORS = ["green", "red", "black", "white", "blue", "orange", "yellow", "purple"]
POSITIONS = ["in front of", "behind", "above", "below", "inside", "outside", "near"]
OBJECTS = ["car", "bicycle", "house", "door", "boat", "bus", "chair", "table",
           "lamp", "fence", "tent", "truck", "kite", "wagon"]
TIMES = ["in the morning", "in the evening", "at night", "during the day"]
MOODS = ["happy", "sad", "cheerful", "tired", "calm"]
STATES = ["open", "closed", "full", "empty", "wet", "dry", "clean", "dirty"]

CATEGORIES = [
    (["animals", "pets"], ["puppy", "kitten", "hamster", "parrot"], "sleeping on a sofa"),
    (["vehicles", "road"], ["scooter", "tractor", "minivan", "motorbike"], "parked on a gravel lot"),
    (["food", "fruit"], ["banana", "mango", "peach", "pineapple"], "sliced on a wooden board"),
    (["sports", "ball games"], ["football", "basketball", "racket", "volleyball"], "lying on the grass"),
    (["nature", "mountains"], ["glacier", "summit", "canyon", "waterfall"], "seen from a trail"),
    (["architecture", "city"], ["skyscraper", "bridge", "tower", "cathedral"], "photographed from the street"),
]

CONCEPTS = [
    ("flamingo", "bird", "shallow lakes"), ("cactus", "plant", "deserts"),
    ("tulip", "flower", "gardens"), ("lobster", "crustacean", "cold seas"),
    ("giraffe", "mammal", "savannas"), ("maple", "tree", "northern forests"),
    ("penguin", "bird", "the southern ocean"), ("beetle", "insect", "meadows"),
    ("salmon", "fish", "rivers"), ("orchid", "flower", "tropical forests"),
    ("camel", "mammal", "dry plains"), ("fern", "plant", "damp woods"),
    ("octopus", "mollusk", "rocky reefs"), ("parrot", "bird", "rainforests"),
    ("zebra", "mammal", "grasslands"), ("pumpkin", "vegetable", "farm fields"),
]
QUALITIES = ["remarkable", "familiar", "unusual", "valuable", "striking"]

SLOGAN_VERBS = ["Chase", "Follow", "Find", "Share", "Feel", "Live", "Own", "Start"]
SLOGAN_NOUNS = ["dream", "freedom", "moment", "journey", "story", "spirit", "future", "rhythm"]
SLOGAN_ENDINGS = ["today", "every day", "without limits", "your way", "again", "together"]
PRODUCTS = [["sneaker", "runner"], ["perfume", "bottle"], ["watch", "wrist"],
            ["phone", "screen"], ["soda", "can"], ["jacket", "model"],
            ["coffee", "cup"], ["headphones", "music"]]


def image(kind, i):
    return f"mini/{kind}/{i:03d}.jpg"


def write(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False, separators=(", ", ": ")) + "\n")


def captions():
    out = []
    for i in range(N):
        path, things, setting = CATEGORIES[i % len(CATEGORIES)]
        thing = rng.choice(things)
        out.append({
            "id": f"cap-{i:03d}",
            "image_ref": image("captions", i),
            "texts": [f"A photo of a {thing} {setting}."],
            "category_path": path,
            "concept_tags": [thing, path[-1]],
        })
    return out


def descriptions():
    out = []
    for i in range(N):
        size, person, color, obj = (rng.choice(SIZES), rng.choice(PEOPLE),
                                    rng.choice(COLORS), rng.choice(OBJECTS))
        pos = rng.choice(POSITIONS)
        text = f"A {size} {person} standing {pos} the {color} {obj}."
        if i % 3 == 0:
            text += f" The {person} looks {rng.choice(MOODS)}."
        out.append({
            "id": f"desc-{i:03d}",
            "image_ref": image("descriptions", i),
            "texts": [text],
            "category_path": ["people", "scenes"],
            "concept_tags": [size, person, color, obj],
        })
    return out


def stories():
    out = []
    for s in range(N):
        person, obj, color = rng.choice(PEOPLE), rng.choice(OBJECTS), rng.choice(COLORS)
        state, time = rng.choice(STATES), rng.choice(TIMES)
        first = f"Our {person} walked to the {color} {obj} {time}."
        second = f"Later that week the {obj} was {state} and everyone talked about the trip."
        story = f"story-{s:03d}"
        out.append({
            "id": f"{story}-a",
            "image_ref": image("stories", 2 * s),
            "texts": [first],
            "story_id": story,
            "concept_tags": [person, color, obj],
        })
        out.append({
            "id": f"{story}-b",
            "image_ref": None,
            "texts": [second],
            "story_id": story,
        })
    return out


def concepts():
    images, summaries = [], []
    for i in range(N):
        base, kind, habitat = CONCEPTS[i % len(CONCEPTS)]
        name = f"{base} {i // len(CONCEPTS) + 1}" if i >= len(CONCEPTS) else base
        color, size = rng.choice(COLORS), rng.choice(SIZES)
        images.append({
            "id": f"cimg-{i:03d}",
            "image_ref": image("concepts", i),
            "concept": name,
            "concept_tags": [base, color, size],
        })
        summaries.append({
            "id": f"csum-{i:03d}",
            "image_ref": None,
            "concept": name,
            "texts": [f"The {base} is a {kind} commonly found in {habitat}. "
                      f"Most specimens are {color} and fairly {size}. "
                      f"Naturalists regard it as {rng.choice(QUALITIES)} within its group."],
        })
    return images, summaries


def slogans():
    out = []
    for i in range(N + 8):
        tags = PRODUCTS[i % len(PRODUCTS)]
        if i >= N:
            # mentions its own product and is rejected by the generator
            text = f"The best {tags[0]} money can buy."
        else:
            text = f"{rng.choice(SLOGAN_VERBS)} your {rng.choice(SLOGAN_NOUNS)} {rng.choice(SLOGAN_ENDINGS)}."
        out.append({
            "id": f"slogan-{i:03d}",
            "image_ref": image("slogans", i),
            "texts": [text],
            "concept_tags": tags,
        })
    return out


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent
    outdir.mkdir(parents=True, exist_ok=True)
    write(outdir / "captions.jsonl", captions())
    write(outdir / "descriptions.jsonl", descriptions())
    write(outdir / "stories.jsonl", stories())
    imgs, sums = concepts()
    write(outdir / "concept_images.jsonl", imgs)
    write(outdir / "concept_summaries.jsonl", sums)
    write(outdir / "slogans.jsonl", slogans())


if __name__ == "__main__":
    main()
