# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled word kernels; same contracts as ``_pykernels``."""


def free_reduce(seq):
    cdef list out = []
    cdef Py_ssize_t n = 0
    cdef long x
    for x in seq:
        if n and <long>out[n - 1] == -x:
            out.pop()
            n -= 1
        else:
            out.append(x)
            n += 1
    return tuple(out)


def mul(tuple a, tuple b):
    cdef Py_ssize_t i = len(a)
    cdef Py_ssize_t j = 0
    cdef Py_ssize_t nb = len(b)
    while i > 0 and j < nb and <long>a[i - 1] == -<long>b[j]:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def inverse(tuple w):
    cdef Py_ssize_t n = len(w)
    cdef Py_ssize_t i
    cdef list out = [0] * n
    for i in range(n):
        out[i] = -<long>w[n - 1 - i]
    return tuple(out)


def cyclic_split(tuple w):
    cdef Py_ssize_t n = len(w)
    cdef Py_ssize_t k = 0
    while 2 * k + 1 < n and <long>w[k] == -<long>w[n - 1 - k]:
        k += 1
    return k


def power(tuple w, long n):
    if n < 0:
        w = inverse(w)
        n = -n
    if n == 0 or not w:
        return ()
    cdef Py_ssize_t k = cyclic_split(w)
    if k == 0:
        return w * n
    cdef Py_ssize_t m = len(w)
    return w[:k] + w[k:m - k] * n + w[m - k:]


cpdef long letter_key(long x):
    return 2 * x if x > 0 else -2 * x + 1


def shortlex_key(tuple w):
    return (len(w), tuple([letter_key(x) for x in w]))


def substitute(word, images):
    cdef list out = []
    cdef Py_ssize_t n = 0
    cdef long x, y
    cdef tuple img
    cdef Py_ssize_t i, m
    for x in word:
        img = images[x] if x > 0 else images[-x]
        m = len(img)
        for i in range(m):
            y = <long>img[i] if x > 0 else -<long>img[m - 1 - i]
            if n and <long>out[n - 1] == -y:
                out.pop()
                n -= 1
            else:
                out.append(y)
                n += 1
    return tuple(out)
