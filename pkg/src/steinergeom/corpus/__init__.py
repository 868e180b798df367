"""Bundled reference structures, loaded from JSON shipped with the package."""

from importlib import resources

from ..space import PartialLinearSpace

# mermelstein_C is the full counterexample structure and mermelstein is
# its working alias; mermelstein_B is the induced base of the pair.
NAMES = ("pasch", "mitre", "mia", "fano", "mermelstein", "mermelstein_B",
         "mermelstein_C", "ag23")


def load(name: str) -> PartialLinearSpace:
    if name not in NAMES:
        raise KeyError(f"unknown corpus structure {name!r}; available: {', '.join(NAMES)}")
    text = resources.files(__package__).joinpath(f"{name}.json").read_text()
    return PartialLinearSpace.from_json(text)
