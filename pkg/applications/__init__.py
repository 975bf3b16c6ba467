"""Instance builders and numeric bounds for the classic applications.

Covers k-SAT with a bounded number of occurrences per variable, hypergraph
coloring, independent transversals, a second Hamiltonian cycle, and Ramsey
colorings of K_n without a red K_s.
"""


class ApplicationInputError(Exception):
    """Exception raised when an application input violates its preconditions."""

    pass


__all__ = ["ApplicationInputError"]
