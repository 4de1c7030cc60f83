"""Content-addressed storage for observations and renders.

Layout under the store root::

    renders/{render_hash}.pgm
    observations/{observation_key}.json   # screen id, render hash, a11y tree
"""

import json
import os
import tempfile
from pathlib import Path

from .sim.env import A11yNode, Observation
from .sim.render import read_pgm, write_pgm


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_jsonl(path, rows):
    text = "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in rows)
    return atomic_write_text(path, text)


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_json(path, obj):
    return atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


class ObservationStore:
    def __init__(self, root):
        self.root = Path(root)
        self._cache = {}

    def render_path(self, render_hash):
        return self.root / "renders" / f"{render_hash}.pgm"

    def put(self, obs):
        key = obs.key
        if key in self._cache:
            return key
        obs_path = self.root / "observations" / f"{key}.json"
        if not obs_path.exists():
            rpath = self.render_path(obs.render_hash)
            if not rpath.exists():
                write_pgm(obs.render, rpath)
            write_json(obs_path, {
                "screen_id": obs.screen_id,
                "title": obs.title,
                "render": obs.render_hash,
                "a11y": [n.to_json() for n in obs.a11y],
            })
        self._cache[key] = obs
        return key

    def get(self, key):
        obs = self._cache.get(key)
        if obs is not None:
            return obs
        meta = read_json(self.root / "observations" / f"{key}.json")
        render = read_pgm(self.render_path(meta["render"]))
        obs = Observation(meta["screen_id"], render,
                          tuple(A11yNode.from_json(n) for n in meta["a11y"]), None,
                          meta.get("title", ""))
        self._cache[key] = obs
        return obs
