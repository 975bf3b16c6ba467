"""Sample input texts shared by the unit and command-line tests."""

TOY_INSTANCE_TEXT = """# three fair bits, two overlapping events
vars 3
dom 0 0:0.5 1:0.5
dom 1 0:1/2 1:1/2
dom 2 0:0.5 1:0.5
ev (0,0) (1,0)
ev (1,1) (2,0)
"""

COMPLEMENTARY_INSTANCE_TEXT = """vars 1
dom 0 0:0.5 1:0.5
ev (0,0)
ev (0,1)
"""

CONTRADICTORY_INSTANCE_TEXT = """vars 2
dom 0 0:0.5 1:0.5
dom 1 0:0.5 1:0.5
ev (0,0) (0,1)
"""

MALFORMED_INSTANCE_TEXT = """vars 2
dom 0 0:0.5 1:0.5
dom 1 0:0.5 1:0.5
ev (0,0) (1,
"""

# 4-CNF, every variable in exactly two clauses
SMALL_CNF_TEXT = """c small satisfiable formula
p cnf 8 4
1 2 3 4 0
-1 5 6 7 0
-2 -5 8 3 0
4 -6 -7
-8 0
"""

# 4-uniform, every vertex of degree 2
SMALL_HYPERGRAPH_TEXT = """v 8
edge 0 1 2 3
edge 4 5 6 7
edge 0 2 4 6
edge 1 3 5 7
"""

# three classes of four vertices, cross-class degree at most 1
TRANSVERSAL_GRAPH_TEXT = """n 12
0 4
1 8
5 9
2 10
class 0 1 2 3
class 4 5 6 7
class 8 9 10 11
"""
