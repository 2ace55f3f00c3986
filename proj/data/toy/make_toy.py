# Copyright 2026 The sds-harness Authors
# SPDX-License-Identifier: Apache-2.0

"""Regenerates the toy corpus: corpus.jsonl plus one 8 kHz mono WAV per utterance."""

import json
import math
import struct
import wave
from pathlib import Path

RATE = 8000

UTTERANCES = [
    ("toy-1", "A", 0.0, 2.0, "hi how are you doing today"),
    ("toy-2", "A", 0.0, 1.5, "did you see the game last night"),
    ("toy-1", "B", 2.4, 4.0, "i am doing well thanks for asking"),
    ("toy-2", "B", 1.8, 3.2, "no i missed it who won"),
    ("toy-1", "A", 4.3, 6.5, "that is great to hear what have you been up to"),
    ("toy-1", "B", 5.0, 5.6, "yeah"),
    ("toy-2", "A", 3.5, 5.0, "the home team won in overtime"),
    ("toy-1", "B", 6.9, 8.8, "mostly working on my garden this week"),
    ("toy-2", "B", 5.2, 6.0, "uh huh"),
    ("toy-1", "A", 8.5, 10.0, "oh nice what are you growing"),
]


def write_wav(path, seconds, freq):
    n = int(round(seconds * RATE))
    frames = bytearray()
    for i in range(n):
        t = i / RATE
        # Syllable-rate envelope so the signal looks like speech to an energy VAD.
        env = 0.6 + 0.4 * math.sin(2 * math.pi * 4.0 * t)
        frames += struct.pack("<h", int(8000 * env * math.sin(2 * math.pi * freq * t)))
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(RATE)
        w.writeframes(bytes(frames))


def main():
    here = Path(__file__).resolve().parent
    lines = []
    for idx, (conv, ch, start, end, text) in enumerate(UTTERANCES):
        name = f"{conv}_{idx:02d}_{ch}.wav"
        write_wav(here / name, end - start, 180.0 if ch == "A" else 240.0)
        lines.append(json.dumps({
            "conversation_id": conv,
            "channel": ch,
            "start_s": start,
            "end_s": end,
            "text": text,
            "audio_path": name,
        }))
    (here / "corpus.jsonl").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
