"""Shipped scenario files."""

from importlib import resources

NAMES = ("ideal_qubit", "nonideal_qubit", "luders_qutrit", "macroscopic_qubit")


def path(name: str):
    return resources.files(__name__) / f"{name}.json"
