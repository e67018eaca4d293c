from .build import build_store
from .collect import (STOP_MARKER, collect_roam, collect_stop,
                      stop_approaches)
from .frames import (FrameStore, load_store, pack_grid, save_store,
                     unpack_batch, unpack_grid)
from .sampling import TrainingSampler
from .snippets import (end_labels, enumerate_segments, extract_snippets,
                       tag_misleading)

__all__ = [
    "build_store",
    "STOP_MARKER", "collect_roam", "collect_stop", "stop_approaches",
    "FrameStore", "load_store", "pack_grid", "save_store", "unpack_batch",
    "unpack_grid",
    "TrainingSampler",
    "end_labels", "enumerate_segments", "extract_snippets", "tag_misleading",
]
