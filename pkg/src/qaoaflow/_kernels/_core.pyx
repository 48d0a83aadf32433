# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels.

Same contract as `_fallback.py`.  Elementwise loops use OpenMP with a
static schedule and disjoint index writes, so results are bit-identical
for any thread count; the expectation reduction stays sequential for the
same reason.
"""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define QF_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int QF_POPCOUNT64(unsigned long long v) {
        int c = 0;
        while (v) { v &= v - 1; ++c; }
        return c;
    }
    #endif
    """
    int QF_POPCOUNT64(unsigned long long) nogil


def diagonal_energies(unsigned long long[::1] masks, double[::1] coeffs,
                      double constant, int n):
    cdef Py_ssize_t size = 1 << n
    cdef Py_ssize_t nterms = masks.shape[0]
    out_arr = np.empty(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, t
    cdef double e
    with nogil:
        for i in prange(size, schedule='static'):
            e = constant
            for t in range(nterms):
                e = e + coeffs[t] * (1.0 - 2.0 * (QF_POPCOUNT64(
                    (<unsigned long long> i) & masks[t]) & 1))
            out[i] = e
    return out_arr


def accumulate_parity_phase(double[::1] phi, unsigned long long mask,
                            double weight):
    cdef Py_ssize_t size = phi.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in prange(size, schedule='static'):
            phi[i] += weight * (1.0 - 2.0 * (QF_POPCOUNT64(
                (<unsigned long long> i) & mask) & 1))


def apply_phase(double complex[::1] amps, double[::1] phi):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in prange(size, schedule='static'):
            amps[i] = amps[i] * (cos(phi[i]) - 1j * sin(phi[i]))


def apply_uniform_phase(double complex[::1] amps, double[::1] energies,
                        double gamma, double constant):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t i
    cdef double ph
    with nogil:
        for i in prange(size, schedule='static'):
            ph = gamma * (energies[i] - constant)
            amps[i] = amps[i] * (cos(ph) - 1j * sin(ph))


def apply_rx(double complex[::1] amps, double beta, int qubit):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t npairs = size >> 1
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << qubit
    cdef double c = cos(beta), s = sin(beta)
    cdef Py_ssize_t t, i0, i1
    cdef double complex a, b
    with nogil:
        for t in prange(npairs, schedule='static'):
            i0 = ((t >> qubit) << (qubit + 1)) | (t & (stride - 1))
            i1 = i0 | stride
            a = amps[i0]
            b = amps[i1]
            amps[i0] = c * a + 1j * s * b
            amps[i1] = 1j * s * a + c * b


def apply_hadamard(double complex[::1] amps, int qubit):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t npairs = size >> 1
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << qubit
    cdef double inv = 1.0 / sqrt(2.0)
    cdef Py_ssize_t t, i0, i1
    cdef double complex a, b
    with nogil:
        for t in prange(npairs, schedule='static'):
            i0 = ((t >> qubit) << (qubit + 1)) | (t & (stride - 1))
            i1 = i0 | stride
            a = amps[i0]
            b = amps[i1]
            amps[i0] = (a + b) * inv
            amps[i1] = (a - b) * inv


def apply_xy(double complex[::1] amps, double beta, int qj, int qk):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t nquads = size >> 2
    cdef Py_ssize_t sj = (<Py_ssize_t> 1) << qj
    cdef Py_ssize_t sk = (<Py_ssize_t> 1) << qk
    cdef double c = cos(beta), s = sin(beta)
    cdef Py_ssize_t t, base, ia, ib
    cdef double complex a, b
    with nogil:
        for t in prange(nquads, schedule='static'):
            base = ((t >> qj) << (qj + 1)) | (t & (sj - 1))
            base = ((base >> qk) << (qk + 1)) | (base & (sk - 1))
            ia = base | sj
            ib = base | sk
            a = amps[ia]
            b = amps[ib]
            amps[ia] = c * a + 1j * s * b
            amps[ib] = 1j * s * a + c * b


def probabilities(double complex[::1] amps):
    cdef Py_ssize_t size = amps.shape[0]
    out_arr = np.empty(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in prange(size, schedule='static'):
            out[i] = amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    return out_arr


def expectation(double complex[::1] amps, double[::1] energies):
    # sequential on purpose: a fixed reduction order keeps results
    # independent of the thread count
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    with nogil:
        for i in range(size):
            acc += (amps[i].real * amps[i].real
                    + amps[i].imag * amps[i].imag) * energies[i]
    return acc
