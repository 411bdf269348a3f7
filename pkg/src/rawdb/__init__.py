"""rawdb: in situ SQL analytics over raw delimited files.

Queries run directly over registered csv/tbl files through a plan-conversion
pipeline and a partitioned parallel executor, with a learned partition index
for join pruning, pluggable group-by strategies, and UDFs callable from SQL.
"""

from .engine import Engine, EngineConfig, QueryResult, QueryStats

__version__ = "0.1.0"

__all__ = ["Engine", "EngineConfig", "QueryResult", "QueryStats", "__version__"]
