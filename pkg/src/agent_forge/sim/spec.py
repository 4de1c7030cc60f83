"""Generative app specifications for the simulated device."""

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Tuple

from ..exceptions import ValidationError

SPEC_VERSION = 1

ELEMENT_KINDS = ("nav", "toggle", "input", "back", "terminal")

# Typed text for inputs during exploration and for generated values.
LEXICON = (
    "alpha", "bravo", "cobalt", "delta", "ember", "falcon", "garnet", "harbor",
    "indigo", "juniper", "kestrel", "lumen", "meadow", "nectar", "orbit", "pepper",
)

_SCREEN_WORDS = (
    "Settings", "Network", "Display", "Sound", "Storage", "Privacy", "Accounts",
    "Calendar", "Events", "Reminders", "Contacts", "Favorites", "Recipes", "Notes",
    "Files", "Downloads", "Gallery", "Albums", "Alarms", "Timers", "Playlists",
    "Library", "Search", "Profile", "Security", "Battery", "Language", "Backup",
    "Sync", "Archive", "Labels", "Filters", "Widgets", "Themes", "Shortcuts",
    "History", "Bookmarks", "Downloads Queue", "Notifications", "Permissions",
)

_FIELD_WORDS = (
    "wifi", "bluetooth", "dark mode", "airplane mode", "auto sync", "location",
    "vibration", "do not disturb", "battery saver", "auto rotate", "night light",
    "hotspot", "nfc", "captions", "data saver", "device name", "nickname",
    "signature", "home city", "default folder", "display name", "ringtone",
    "wallpaper", "status message", "backup account", "shuffle", "repeat",
    "autoplay", "high quality", "reminder tone", "week start", "time zone",
    "recipe title", "category", "description", "event title", "location name",
    "email", "phone number", "username",
)

_BUTTON_WORDS = (
    "Help", "About", "Share", "Rate", "Info", "Details", "Tips", "Feedback",
    "Legal", "Licenses", "Version", "Support",
)

_STATIC_WORDS = (
    "Last updated today", "No items", "Tap to learn more", "Storage 42% used",
    "3 devices connected", "Synced just now", "Version 2.1", "Recently viewed",
)


@dataclass(frozen=True)
class UiElement:
    element_id: int
    kind: str
    label: str
    interactable: bool = True
    target: Optional[int] = None
    field: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValidationError(f"unknown element kind {self.kind!r}", field="kind")
        if self.kind == "nav" and self.target is None:
            raise ValidationError("nav element needs a target screen", field="target")
        if self.kind in ("toggle", "input") and not self.field:
            raise ValidationError(f"{self.kind} element needs a field name", field="field")

    def to_json(self):
        out = {"id": self.element_id, "kind": self.kind, "label": self.label,
               "interactable": self.interactable}
        if self.target is not None:
            out["target"] = self.target
        if self.field is not None:
            out["field"] = self.field
        return out

    @classmethod
    def from_json(cls, d):
        return cls(d["id"], d["kind"], d["label"], d.get("interactable", True),
                   d.get("target"), d.get("field"))


@dataclass(frozen=True)
class SimScreenSpec:
    screen_id: int
    title: str
    elements: Tuple[UiElement, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValidationError(f"screen {self.screen_id} has no elements")
        ids = [e.element_id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"screen {self.screen_id} has duplicate element ids")

    def element(self, element_id):
        for el in self.elements:
            if el.element_id == element_id:
                return el
        return None


@dataclass(frozen=True)
class SimAppSpec:
    app_name: str
    screens: Tuple[SimScreenSpec, ...]
    data_fields: Tuple[Tuple[str, object], ...]
    seed: int = 0
    params: Tuple[Tuple[str, int], ...] = field(default=())

    def __post_init__(self):
        validate_spec(self)

    @property
    def initial_data(self):
        return dict(self.data_fields)

    @property
    def nav_edges(self):
        return sorted({(s.screen_id, e.target) for s in self.screens
                       for e in s.elements if e.kind == "nav"})

    def screen(self, screen_id):
        return self.screens[screen_id]

    @cached_property
    def field_elements(self):
        """field name -> (screen_id, element) hosting it."""
        out = {}
        for s in self.screens:
            for e in s.elements:
                if e.field is not None:
                    out[e.field] = (s.screen_id, e)
        return out

    @cached_property
    def planner(self):
        from .planner import Planner

        return Planner(self)

    def to_json(self):
        return {
            "version": SPEC_VERSION,
            "app_name": self.app_name,
            "seed": self.seed,
            "params": dict(self.params),
            "data_fields": [[k, v] for k, v in self.data_fields],
            "nav_edges": [list(e) for e in self.nav_edges],
            "screens": [
                {"id": s.screen_id, "title": s.title,
                 "elements": [e.to_json() for e in s.elements]}
                for s in self.screens
            ],
        }

    @classmethod
    def from_json(cls, d):
        if d.get("version") != SPEC_VERSION:
            raise ValidationError(f"unsupported app spec version {d.get('version')!r}")
        screens = tuple(
            SimScreenSpec(s["id"], s["title"], tuple(UiElement.from_json(e) for e in s["elements"]))
            for s in d["screens"]
        )
        return cls(
            app_name=d["app_name"],
            screens=screens,
            data_fields=tuple((k, v) for k, v in d["data_fields"]),
            seed=d.get("seed", 0),
            params=tuple(sorted(d.get("params", {}).items())),
        )


def validate_spec(spec):
    n = len(spec.screens)
    if n == 0:
        raise ValidationError("app has no screens")
    for i, s in enumerate(spec.screens):
        if s.screen_id != i:
            raise ValidationError(f"screen ids must be dense 0..{n - 1}")
    fields = dict(spec.data_fields)
    for s in spec.screens:
        for e in s.elements:
            if e.kind == "nav" and not 0 <= e.target < n:
                raise ValidationError(
                    f"screen {s.screen_id} element {e.element_id} targets missing screen {e.target}"
                )
            if e.field is not None:
                if e.field not in fields:
                    raise ValidationError(f"element field {e.field!r} is not a data field")
                expected = bool if e.kind == "toggle" else str
                if not isinstance(fields[e.field], expected):
                    raise ValidationError(f"field {e.field!r} has the wrong value type")
    # undirected connectivity
    adj = {i: set() for i in range(n)}
    for a, b in spec.nav_edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    frontier = [0]
    while frontier:
        cur = frontier.pop()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    if len(seen) != n:
        raise ValidationError(f"screen graph is disconnected ({len(seen)}/{n} reachable)")


def _title_case(words):
    return " ".join(w.capitalize() if w.islower() else w for w in words.split())


def generate_app(n_screens, elements_per_screen, n_fields=0, seed=0, app_name=None):
    """Generate a connected app deterministically from its parameters and seed.

    Screens form a random tree rooted at the home screen (0). Parents link to
    children and every non-home screen carries an "Up" link to its parent, so
    the nav graph is strongly connected. Data fields (toggles and text inputs)
    are scattered across screens, and screens are padded to
    ``elements_per_screen`` with cross links, dead buttons, back buttons and
    static text.
    """
    if isinstance(n_screens, bool) or not isinstance(n_screens, int) or n_screens < 2:
        raise ValidationError(f"n_screens must be an integer >= 2, got {n_screens!r}", field="n_screens")
    if isinstance(elements_per_screen, bool) or not isinstance(elements_per_screen, int) \
            or elements_per_screen < 2:
        raise ValidationError(
            f"elements_per_screen must be an integer >= 2, got {elements_per_screen!r}",
            field="elements_per_screen",
        )
    if n_fields < 0:
        raise ValidationError("n_fields must be >= 0", field="n_fields")
    rng = random.Random(seed)
    app_name = app_name or f"App{seed}"

    titles = []
    words = list(_SCREEN_WORDS)
    rng.shuffle(words)
    for i in range(n_screens):
        base = "Home" if i == 0 else words[(i - 1) % len(words)]
        cycle = (i - 1) // len(words) if i else 0
        titles.append(base if cycle == 0 else f"{base} {cycle + 1}")

    parent = [None] + [rng.randrange(i) for i in range(1, n_screens)]

    field_words = list(_FIELD_WORDS)
    rng.shuffle(field_words)
    data_fields = []
    field_specs = []  # (screen, kind, name)
    for j in range(n_fields):
        base = field_words[j % len(field_words)]
        name = base if j < len(field_words) else f"{base} {j // len(field_words) + 1}"
        kind = "toggle" if rng.random() < 0.6 else "input"
        value = rng.random() < 0.5 if kind == "toggle" else rng.choice(LEXICON)
        data_fields.append((name, value))
        field_specs.append((rng.randrange(n_screens), kind, name))

    # (kind, label, interactable, target, field) prototypes per screen
    protos = [[] for _ in range(n_screens)]
    for child in range(1, n_screens):
        protos[parent[child]].append(("nav", titles[child], True, child, None))
        protos[child].append(("nav", f"Up to {titles[parent[child]]}", True, parent[child], None))
    for screen, kind, name in field_specs:
        protos[screen].append((kind, _title_case(name), True, None, name))
    for s in range(n_screens):
        while len(protos[s]) < elements_per_screen:
            roll = rng.random()
            if roll < 0.3 and n_screens > 2:
                dst = rng.choice([x for x in range(n_screens) if x != s])
                protos[s].append(("nav", f"Go to {titles[dst]}", True, dst, None))
            elif roll < 0.55:
                protos[s].append(("terminal", rng.choice(_BUTTON_WORDS), True, None, None))
            elif roll < 0.7:
                protos[s].append(("back", "Back", True, None, None))
            else:
                protos[s].append(("terminal", rng.choice(_STATIC_WORDS), False, None, None))

    screens = []
    for s in range(n_screens):
        items = protos[s]
        rng.shuffle(items)
        elements = tuple(
            UiElement(i, kind, label, interactable, target, fld)
            for i, (kind, label, interactable, target, fld) in enumerate(items)
        )
        screens.append(SimScreenSpec(s, titles[s], elements))

    params = (("elements_per_screen", elements_per_screen), ("n_fields", n_fields),
              ("n_screens", n_screens))
    return SimAppSpec(app_name, tuple(screens), tuple(data_fields), seed, params)


SUITE_APP_NAMES = (
    "Clock", "Contacts", "Files", "Notes", "Calendar", "Recorder", "Gallery",
    "Music", "Recipes", "Tasks", "Expenses", "Browser", "Camera", "Maps",
    "Weather", "Messages", "Mail", "Podcasts", "Fitness", "Settings",
)


def generate_suite(n_apps, n_screens, elements_per_screen, n_fields, seed=0):
    """Generate ``n_apps`` apps with seeds ``seed, seed+1, ...``."""
    if n_apps < 1:
        raise ValidationError("n_apps must be >= 1", field="n_apps")
    return [
        generate_app(n_screens, elements_per_screen, n_fields, seed + i,
                     app_name=SUITE_APP_NAMES[i % len(SUITE_APP_NAMES)]
                     + ("" if i < len(SUITE_APP_NAMES) else str(i // len(SUITE_APP_NAMES))))
        for i in range(n_apps)
    ]


def save_spec(spec, directory):
    path = Path(directory) / f"{spec.app_name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.to_json(), indent=1, sort_keys=True) + "\n")
    return path


def load_spec(path):
    return SimAppSpec.from_json(json.loads(Path(path).read_text()))
