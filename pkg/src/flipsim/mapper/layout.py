"""Farthest-first ordering of Inter-Table scatter lists."""

from __future__ import annotations

from ..arch import ConfigImage, InterTableEntry, PETables, layout_lists


def sort_inter_tables(img: ConfigImage) -> ConfigImage:
    """Reorder every scatter list by route length, longest first.

    ``build_tables`` emits groups in ascending destination-id order and the sort
    is stable, so equal-distance entries stay id-ascending.
    """
    cfg = img.cfg
    out = ConfigImage(cfg, img.num_slices)
    for key, t in img.tables.items():
        lists = []
        for slot in range(cfg.drf_capacity):
            entries = t.scatter_list(slot) if t.drf[slot] is not None else []
            entries = sorted(entries, key=lambda e: -e.offset.hops)
            lists.append([(e.src_id, e.offset, e.slice_id) for e in entries])
        inter = layout_lists(lists, cfg.drf_capacity, cfg.inter_table_entries,
                             lambda it, nxt: InterTableEntry(it[0], it[1], it[2], nxt),
                             f"Inter-Table of PE {t.pe} slice {t.slice_id}")
        out.tables[key] = PETables(t.pe, t.slice_id, list(t.drf), inter, list(t.intra))
    return out
