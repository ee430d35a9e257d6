"""Cleaning a messy road layer: endpoint snapping and dangle trimming.

A small network with three kinds of defects: a gap where two segments almost
meet, a chain of endpoints that only connect transitively, and a cul-de-sac
chain hanging off a ring road.
"""
import numpy as np

from parcelca import RoadNetwork, RoadSegment, snap_network, trim_dangles


def seg(seg_id, coords, cls=2):
    return RoadSegment(seg_id=seg_id, polyline=np.asarray(coords, dtype=float),
                       hierarchy_class=cls)


net = RoadNetwork(segments=[
    # a ring road
    seg(0, [(0, 0), (1000, 0)]),
    seg(1, [(1000, 0), (1000, 1000)]),
    seg(2, [(1000, 1000), (0, 1000)]),
    seg(3, [(0, 1000), (0, 0)]),
    # an approach road that stops 12 m short of the ring
    seg(4, [(-800, 0), (-12, 0)]),
    # a cul-de-sac chain off the ring: two 150 m stubs in series
    seg(5, [(1000, 1000), (1150, 1000)]),
    seg(6, [(1150, 1000), (1150, 1150)]),
])

print(f"raw network: {len(net.segments)} segments, {net.node_count()} nodes, "
      f"{net.total_length():.0f} m")

snapped = snap_network(net, tolerance=20.0)
print(f"after snapping @20 m: {snapped.node_count()} nodes "
      f"(the 12 m gap is gone; both endpoints moved to their centroid)")

degree_one = sum(1 for ids in snapped.node_index().values() if len(ids) == 1)
print(f"dead ends before trimming: {degree_one}")

trimmed = trim_dangles(snapped, min_length=200.0)
print(f"after trimming @200 m: {len(trimmed.segments)} segments "
      f"(both 150 m stubs removed, one exposing the other)")
print(f"the ring road itself survives: "
      f"{sorted(s.seg_id for s in trimmed.segments)}")
