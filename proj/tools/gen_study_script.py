#!/usr/bin/env python3
# Copyright 2026 The NormBridge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the 40-dialogue user-study replay script.

Counts: 25 low-impact and 117 high-impact violations; senders pick the
remediation for 56 of the high-impact ones. Violations sit at least three
turns apart so the impact window never sees an earlier high-impact marker.
"""

import argparse
import random

DIALOGUES = 40
TURNS = 30
LOW = 25
HIGH = 117
REMEDIATION = 56
TIMEOUTS = 6

VIOLATION_MARKERS = ["give me", "hurry up", "whatever", "快点", "随便",
                     "stupid", "useless", "nonsense", "笨", "没用", "胡说"]

NEUTRAL = {
    "SME": [
        "Hello, we need the report tomorrow.",
        "Good morning, is the meeting ready?",
        "Thank you, I understand.",
        "We should check the samples today.",
        "Sorry, I was late again.",
        "Can you send the contract next week?",
        "Please check the schedule.",
        "I agree with the price.",
        "The report is finished.",
        "Goodbye, see you tomorrow.",
    ],
    "FLE": [
        "你好，我们明天讨论价格。",
        "谢谢，我明白了。",
        "会议准备好了。",
        "对不起，我迟到了。",
        "我们可以下周发送合同。",
        "报告今天完成了。",
        "请检查日程。",
        "我同意这个价格。",
        "样品明天发送。",
        "再见，回头见。",
    ],
}

LOW_LINES = {
    "SME": ["Give me the report today.", "Hurry up with the samples.",
            "Whatever, send the contract."],
    "FLE": ["快点发送报告。", "随便，明天讨论。"],
}

HIGH_LINES = {
    "SME": ["This price is nonsense.", "The schedule is useless.",
            "That was a stupid meeting."],
    "FLE": ["这个日程没用。", "你胡说。", "这个报告很笨。"],
}


def has_marker(text):
    folded = text.lower()
    return any(m in folded for m in VIOLATION_MARKERS)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    for lines in NEUTRAL.values():
        assert not any(has_marker(l) for l in lines)

    high_per = [3] * DIALOGUES
    for i in range(3 * DIALOGUES - HIGH):
        high_per[i] = 2
    low_per = [1] * LOW + [0] * (DIALOGUES - LOW)
    rng.shuffle(high_per)
    rng.shuffle(low_per)

    choices = (["remediation"] * REMEDIATION + ["timeout"] * TIMEOUTS +
               ["translation"] * (HIGH - REMEDIATION - TIMEOUTS))
    rng.shuffle(choices)

    out = ["# User-study replay: 40 dialogues of 30 turns.",
           f"# {LOW} low-impact and {HIGH} high-impact violations; "
           f"{REMEDIATION} remediation picks.",
           "@lang SME=en FLE=zh"]
    for d in range(DIALOGUES):
        out.append(f"@dialogue study-{d + 1:02d}")
        # Violations at turns 5, 13, 21 (high) and 27 (low), 1-based.
        high_slots = [5, 13, 21][:high_per[d]]
        low_slots = [27] if low_per[d] else []
        for t in range(1, TURNS + 1):
            speaker = "SME" if t % 2 else "FLE"
            if rng.random() < 0.3:
                speaker = "FLE" if speaker == "SME" else "SME"
            if t in high_slots:
                out.append(f"{speaker}\t{rng.choice(HIGH_LINES[speaker])}"
                           f"\tchoice={choices.pop()}")
            elif t in low_slots:
                out.append(f"{speaker}\t{rng.choice(LOW_LINES[speaker])}")
            else:
                out.append(f"{speaker}\t{rng.choice(NEUTRAL[speaker])}")
    assert not choices
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
