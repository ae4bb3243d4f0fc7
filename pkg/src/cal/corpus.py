"""Synthetic transcripts and a scripted annotator for desk-scale runs.

Everything here is deterministic given the seed, so benchmark runs and
replay comparisons are reproducible.
"""

from __future__ import annotations

import random

from . import rules
from .store import ProjectStore

_OPENERS = [
    "Hi, I have a question about my recent order.",
    "Hello, my package tracking has not updated in days.",
    "Hey, I want to change the shipping address on an order.",
    "Good morning, I was double charged for one item.",
    "Hi, the discount code from your newsletter does not work.",
]

_HUMAN_LINES = [
    "It is order number {n}.",
    "I placed it about {d} days ago.",
    "Can you check what is going on?",
    "That does not really answer my question.",
    "Alright, and how long would that take?",
    "Is there a fee for that?",
    "Could you send me a confirmation email?",
    "Actually, do you also sell gift cards?",
    "Thanks, that helps.",
    "One more thing: can I pick it up in a store instead?",
]

_BOT_LINES = [
    "I can help with that. Could you share the order number?",
    "Thanks, let me look that up for you.",
    "Order {n} is currently at the regional sorting facility.",
    "I have updated the record; you will receive an email shortly.",
    "Typical processing time is {d} business days.",
    "There is no extra fee for this change.",
    "Is there anything else I can help you with today?",
    "I am sorry about the confusion; let me rephrase.",
    "You can pick it up at any store once it arrives.",
    "Yes, gift cards are available in the online shop.",
]


def synthetic_transcript(
    n_conversations: int = 30,
    min_utterances: int = 10,
    max_utterances: int = 20,
    seed: int = 7,
) -> list[dict]:
    """Customer-support chats with alternating human/bot turns."""
    rng = random.Random(seed)
    conversations = []
    for c in range(n_conversations):
        length = rng.randint(min_utterances, max_utterances)
        utterances = []
        for i in range(length):
            if i == 0:
                text = rng.choice(_OPENERS)
                speaker = "human"
            elif i % 2 == 0:
                text = rng.choice(_HUMAN_LINES)
                speaker = "human"
            else:
                text = rng.choice(_BOT_LINES)
                speaker = "bot"
            text = text.format(n=rng.randint(10000, 99999), d=rng.randint(1, 9))
            utterances.append({"speaker": speaker, "text": text})
        conversations.append({"id": f"conv-{c + 1:03d}", "utterances": utterances})
    return conversations


def scripted_labeling(
    store: ProjectStore, annotator: str, target_saves: int, seed: int = 11
) -> dict:
    """Issue exactly target_saves label saves, walking utterances in order.

    Uses the real optimistic-versioning path (expected_version from the last
    returned version) and mixes in periodic overwrites. Returns the locally
    tracked version map so callers can cross-check against the store.
    """
    rng = random.Random(seed)
    code_set = store.project.code_set_for_scope("utterance")
    examples = [
        (conv.id, utt.id, utt.speaker)
        for conv in store.conversations()
        for utt in conv.utterances
    ]
    if not examples or target_saves <= 0:
        return {"saves": 0, "versions": {}}
    versions: dict[tuple, int] = {}
    saves = 0
    i = 0
    while saves < target_saves:
        conv_id, utt_id, speaker = examples[i % len(examples)]
        i += 1
        for category_id in rules.applicable_categories(code_set, speaker, "utterance"):
            if saves >= target_saves:
                break
            category = code_set.category(category_id)
            if category.kind == "text":
                value = rules.SelectedValue.text_value(f"note {saves}")
            else:
                option = rng.choice(category.option_ids())
                value = (
                    rules.SelectedValue.single(option)
                    if category.kind == "single"
                    else rules.SelectedValue.multi((option,))
                )
            key = (conv_id, utt_id, category_id)
            version, _, _ = store.save_assignment(
                annotator,
                conv_id,
                utt_id,
                category_id,
                value,
                expected_version=versions.get(key),
            )
            versions[key] = version
            saves += 1
            # deliberate immediate overwrite now and then: exercises versioning
            if saves % 23 == 0 and saves < target_saves and category.kind == "single":
                option = rng.choice(category.option_ids())
                version, _, _ = store.save_assignment(
                    annotator,
                    conv_id,
                    utt_id,
                    category_id,
                    rules.SelectedValue.single(option),
                    expected_version=versions[key],
                )
                versions[key] = version
                saves += 1
    return {"saves": saves, "versions": versions}
