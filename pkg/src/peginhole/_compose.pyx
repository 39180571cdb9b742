# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scene compositing kernel; see _compose_py.py for the reference
semantics (the two must produce bit-identical rasters)."""

from libc.math cimport floor, ceil


def compose_scene(
    unsigned char[:, ::1] out,
    unsigned char[:, ::1] bg_left,
    unsigned char[:, ::1] bg_right,
    unsigned char[:, ::1] mask,
    double cx1,
    double cy1,
    double cx2,
    double cy2,
    double radius,
    int darkness,
    int gripper,
):
    cdef Py_ssize_t height = out.shape[0]
    cdef Py_ssize_t width = out.shape[1]
    cdef Py_ssize_t half = width // 2
    cdef Py_ssize_t r, c
    cdef unsigned char dark = <unsigned char> darkness
    cdef unsigned char grip = <unsigned char> gripper

    for r in range(height):
        for c in range(half):
            out[r, c] = bg_left[r, c]
        for c in range(half, width):
            out[r, c] = bg_right[r, c - half]

    cdef double r2 = radius * radius
    cdef double cx, cy, dx, dy
    cdef Py_ssize_t lo_r, hi_r, lo_c, hi_c
    cdef int disc
    for disc in range(2):
        cx = cx1 if disc == 0 else cx2
        cy = cy1 if disc == 0 else cy2
        lo_r = max(0, <Py_ssize_t> floor(cy - radius))
        hi_r = min(height, (<Py_ssize_t> ceil(cy + radius)) + 1)
        lo_c = max(0, <Py_ssize_t> floor(cx - radius))
        hi_c = min(width, (<Py_ssize_t> ceil(cx + radius)) + 1)
        for r in range(lo_r, hi_r):
            dy = (<double> r) - cy
            for c in range(lo_c, hi_c):
                dx = (<double> c) - cx
                if dx * dx + dy * dy <= r2:
                    out[r, c] = dark

    for r in range(height):
        for c in range(width):
            if mask[r, c] == 0:
                out[r, c] = grip
