"""sforge: human-in-the-loop generation of training-scenario artifacts.

A scenario is decomposed into information blocks arranged in a dependency
graph. Each block is generated by a ReAct orchestrator that queries
retrieval-backed helper agents and a map tool agent, then passes through a
review state machine gated by the block's automation level.
"""

__version__ = "0.1.0"
