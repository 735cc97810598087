"""Pure-Python word kernels; the reference twin of ``_ckernels.pyx``.

Letters are nonzero ints: generator ``i`` (1-based) is ``i``, its inverse ``-i``.
"""


def free_reduce(seq):
    out = []
    push = out.append
    pop = out.pop
    for x in seq:
        if out and out[-1] == -x:
            pop()
        else:
            push(x)
    return tuple(out)


def mul(a, b):
    """Product of two freely reduced words."""
    i = len(a)
    j = 0
    nb = len(b)
    while i > 0 and j < nb and a[i - 1] == -b[j]:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def inverse(w):
    return tuple(-x for x in reversed(w))


def cyclic_split(w):
    """Return k such that w = c . w[k:len-k] . c^-1 with the middle cyclically reduced."""
    n = len(w)
    k = 0
    while 2 * k + 1 < n and w[k] == -w[n - 1 - k]:
        k += 1
    return k


def power(w, n):
    """w**n for a freely reduced w."""
    if n < 0:
        w = inverse(w)
        n = -n
    if n == 0 or not w:
        return ()
    k = cyclic_split(w)
    if k == 0:
        return w * n
    core = w[k:len(w) - k]
    return w[:k] + core * n + w[len(w) - k:]


def letter_key(x):
    return 2 * x if x > 0 else -2 * x + 1


def shortlex_key(w):
    return (len(w), tuple(letter_key(x) for x in w))


def substitute(word, images):
    """Image of ``word`` (letters over variables 1..n) under letter -> reduced word."""
    out = []
    for x in word:
        img = images[x] if x > 0 else images[-x]
        if x > 0:
            it = img
        else:
            it = [-y for y in reversed(img)]
        for y in it:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)
