"""cutrestrict: a sequent-calculus kernel that rewrites proofs with arbitrary
cuts into proofs whose cuts are analytic, for bi-intuitionistic logic (BiInt)
and the modal logic S5."""

__version__ = "0.1.0"
