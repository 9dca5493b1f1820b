"""
Continuous queries over history and a live feed
================================================

Fill a store with 30 days of synthetic connection-speed probes, then run
three standing queries that mix stored history with freshly buffered tuples.
"""

import tempfile
from pathlib import Path

from edgepipe.streamops import BoundedBuffer, HistoricStore, evaluate, parse_query, render_query
from edgepipe.streamops.synthetic import speed_tuples

DAY = 86400.0
tmp = Path(tempfile.mkdtemp())
store = HistoricStore(tmp / "speedtests.log")
store.extend(speed_tuples(0.0, 30 * DAY, 120.0, seed=3))
print(f"{len(store)} stored tuples")

queries = [
    "EVERY 60 seconds compute the max value of download_speed of the last 3 minutes "
    "FROM speedtests and streaming neubotspeed",
    "EVERY 5 minutes compute the mean of the download_speed of the last 7 days "
    "FROM speedtests and streaming neubotspeed",
    "EVERY 30 seconds compute the mean value of upload_speed starting 10 days ago "
    "FROM speedtests and streaming neubotspeed",
]

###############################################################################
# The live buffer only holds 16 tuples; anything older spills into the store,
# and evaluate() merges both sides so the answer does not depend on where a
# tuple currently lives.

live = BoundedBuffer(16, store)
feed = speed_tuples(30 * DAY, 30 * DAY + 3600, 30.0, seed=4)
for t in feed:
    live.push(t)
now = 30 * DAY + 3600
for text in queries:
    q = parse_query(text).register(now)
    result = evaluate(q, store, live, now)
    print(render_query(q))
    print(f"  -> {result['value']:.3f}   ({store.lines_parsed} stored lines read)")
