"""IMSI concealment and UE/SN mutual authentication with identity-based crypto.

A deterministic simulator: toy bilinear-group IBE/IBS, HN/SN/UE actors,
a wire codec, passive and active IMSI catchers and a flow-level
comparison against pseudonym, certificate and root-key alternatives.
The crypto is a toy and offers no real security.
"""

__version__ = "0.1.0"
