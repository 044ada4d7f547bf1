# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: bitset subset-expansion scans and the gap decoder.

Twin of ``_pure``; every result (values, iteration order, tie-breaking,
floating-point operation order) must match the pure implementation
exactly.  Neighborhoods are uint64 bitsets here instead of Python
integers, and the per-node mode summaries use an O(d^2) dedup scan
instead of a dict, both of which preserve the observable semantics.
"""

from libc.stdlib cimport free, malloc, realloc
from libc.math cimport rint

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    static __inline int expcs_popcount64(unsigned long long x)
    { return __builtin_popcountll(x); }
    #else
    static __inline int expcs_popcount64(unsigned long long x)
    { int c = 0; while (x) { x &= x - 1; c++; } return c; }
    #endif
    """
    int expcs_popcount64(unsigned long long x) nogil

STATUS_RECOVERED = 0
STATUS_STUCK = 1
STATUS_ITERATION_CAP = 2


cdef unsigned long long *_build_masks(object adj_flat, int n, int d, int words) except NULL:
    cdef unsigned long long *masks = <unsigned long long *> malloc(
        <size_t> n * words * sizeof(unsigned long long))
    if masks == NULL:
        raise MemoryError()
    cdef Py_ssize_t t
    cdef int j, w, i
    for t in range(<Py_ssize_t> n * words):
        masks[t] = 0
    for j in range(n):
        for w in range(d):
            i = adj_flat[j * d + w]
            masks[<Py_ssize_t> j * words + (i >> 6)] |= (<unsigned long long> 1) << (i & 63)
    return masks


def expansion_scan(adj_flat, int n, int m, int d, int s_max, double epsilon, cap):
    """See _pure.expansion_scan; identical contract and visit order."""
    cdef int words = (m + 63) >> 6
    cdef unsigned long long *masks = _build_masks(adj_flat, n, d, words)
    cdef double *thresholds = <double *> malloc((s_max + 1) * sizeof(double))
    cdef unsigned long long *unions = <unsigned long long *> malloc(
        <size_t> (s_max + 1) * words * sizeof(unsigned long long))
    cdef int *next_v = <int *> malloc((s_max + 1) * sizeof(int))
    cdef int *prefix = <int *> malloc(s_max * sizeof(int))
    if thresholds == NULL or unions == NULL or next_v == NULL or prefix == NULL:
        free(masks); free(thresholds); free(unions); free(next_v); free(prefix)
        raise MemoryError()
    cdef int s, w, v, depth, count
    cdef long long checked = 0
    cdef double worst = 2.0
    cdef double ratio
    cdef unsigned long long u
    cdef Py_ssize_t child, parent, row
    witness = None
    for s in range(s_max + 1):
        thresholds[s] = (1.0 - epsilon) * d * s
    for w in range(words):
        unions[w] = 0
    depth = 1
    next_v[1] = 0
    try:
        while depth >= 1:
            v = next_v[depth]
            if v >= n:
                depth -= 1
                continue
            next_v[depth] = v + 1
            child = <Py_ssize_t> depth * words
            parent = child - words
            row = <Py_ssize_t> v * words
            count = 0
            for w in range(words):
                u = unions[parent + w] | masks[row + w]
                unions[child + w] = u
                count += expcs_popcount64(u)
            checked += 1
            ratio = count / (<double> (d * depth))
            if ratio < worst:
                worst = ratio
            prefix[depth - 1] = v
            if count <= thresholds[depth]:
                witness = [prefix[s] for s in range(depth)]
                break
            if depth < s_max:
                depth += 1
                next_v[depth] = v + 1
    finally:
        free(masks); free(thresholds); free(unions); free(next_v); free(prefix)
    return worst, witness, checked


def evaluate_subsets(adj_flat, int n, int m, int d, subsets):
    """|N(S)| for each subset of left nodes."""
    cdef int words = (m + 63) >> 6
    cdef unsigned long long *masks = _build_masks(adj_flat, n, d, words)
    cdef unsigned long long *acc = <unsigned long long *> malloc(
        words * sizeof(unsigned long long))
    if acc == NULL:
        free(masks)
        raise MemoryError()
    cdef int w, count
    cdef Py_ssize_t row
    sizes = []
    try:
        for subset in subsets:
            for w in range(words):
                acc[w] = 0
            for v in subset:
                row = <Py_ssize_t> (<int> v) * words
                for w in range(words):
                    acc[w] |= masks[row + w]
            count = 0
            for w in range(words):
                count += expcs_popcount64(acc[w])
            sizes.append(count)
    finally:
        free(masks); free(acc)
    return sizes


cdef struct HeapEntry:
    int count
    int node
    long gen


cdef struct DecoderState:
    int n, m, d
    double quantum
    int *adj          # n*d neighbor lists
    int *rev_ptr      # m+1 CSR offsets
    int *rev          # reverse adjacency
    double *gaps
    double *x
    int *mode_count
    double *mode_key
    double *mode_value
    long *gen
    int *seen_epoch   # touched-node dedup stamps
    HeapEntry *heap
    Py_ssize_t heap_len, heap_cap
    int support


cdef inline double _key(DecoderState *st, double g) nogil:
    if st.quantum == 0.0:
        return g
    return rint(g / st.quantum)


cdef inline bint _heap_before(HeapEntry a, HeapEntry b) nogil:
    if a.count != b.count:
        return a.count > b.count
    return a.node < b.node


cdef int _heap_push(DecoderState *st, int count, int node, long gen) except -1:
    cdef Py_ssize_t i, parent
    cdef HeapEntry entry
    if st.heap_len == st.heap_cap:
        st.heap_cap *= 2
        st.heap = <HeapEntry *> realloc(st.heap, st.heap_cap * sizeof(HeapEntry))
        if st.heap == NULL:
            raise MemoryError()
    entry.count = count
    entry.node = node
    entry.gen = gen
    i = st.heap_len
    st.heap_len += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_before(entry, st.heap[parent]):
            st.heap[i] = st.heap[parent]
            i = parent
        else:
            break
    st.heap[i] = entry
    return 0


cdef void _heap_pop(DecoderState *st) nogil:
    cdef HeapEntry last
    cdef Py_ssize_t i = 0, child
    st.heap_len -= 1
    if st.heap_len == 0:
        return
    last = st.heap[st.heap_len]
    while True:
        child = 2 * i + 1
        if child >= st.heap_len:
            break
        if child + 1 < st.heap_len and _heap_before(st.heap[child + 1], st.heap[child]):
            child += 1
        if _heap_before(st.heap[child], last):
            st.heap[i] = st.heap[child]
            i = child
        else:
            break
    st.heap[i] = last


cdef int _refresh_node(DecoderState *st, int j) except -1:
    """Recompute node j's (mode_value, mode_count): most frequent nonzero
    gap bucket among its d neighbors, ties to the smaller bucket key,
    value taken from the lowest-index neighbor in the winning bucket."""
    cdef int best = 0
    cdef double best_key = 0.0
    cdef double best_value = 0.0
    cdef int t, t2, count
    cdef double k, k2
    cdef Py_ssize_t base = <Py_ssize_t> j * st.d
    cdef bint duplicate
    for t in range(st.d):
        k = _key(st, st.gaps[st.adj[base + t]])
        if k == 0.0:
            continue
        duplicate = False
        for t2 in range(t):
            k2 = _key(st, st.gaps[st.adj[base + t2]])
            if k2 == k:
                duplicate = True
                break
        if duplicate:
            continue
        count = 1
        for t2 in range(t + 1, st.d):
            if _key(st, st.gaps[st.adj[base + t2]]) == k:
                count += 1
        if count > best or (count == best and best > 0 and k < best_key):
            best = count
            best_key = k
            best_value = st.gaps[st.adj[base + t]]
    st.gen[j] += 1
    st.mode_count[j] = best
    if best == 0:
        st.mode_value[j] = 0.0
        st.mode_key[j] = 0.0
        return 0
    st.mode_value[j] = best_value
    st.mode_key[j] = best_key
    _heap_push(st, best, j, st.gen[j])
    return 0


cdef int _peek(DecoderState *st) nogil:
    """Index of the live top node, or -1; pops stale entries."""
    cdef HeapEntry top
    while st.heap_len > 0:
        top = st.heap[0]
        if top.gen != st.gen[top.node]:
            _heap_pop(st)
            continue
        return top.node
    return -1


def decode_run(adj, rev, y, int threshold, long max_iters, double quantum):
    """See _pure.decode_run; identical contract, trace, and statuses."""
    cdef DecoderState st
    cdef int n = len(adj)
    cdef int m = len(rev)
    cdef int d = len(adj[0]) if n > 0 else 0
    cdef Py_ssize_t total = 0, pos
    cdef int i, j, t, w, status, before
    cdef long iters = 0
    cdef double old, new, value, delta
    cdef int touched_len, epoch
    st.n = n; st.m = m; st.d = d; st.quantum = quantum
    st.adj = <int *> malloc(<size_t> n * d * sizeof(int))
    st.rev_ptr = <int *> malloc((m + 1) * sizeof(int))
    st.gaps = <double *> malloc(m * sizeof(double))
    st.x = <double *> malloc(n * sizeof(double))
    st.mode_count = <int *> malloc(n * sizeof(int))
    st.mode_key = <double *> malloc(n * sizeof(double))
    st.mode_value = <double *> malloc(n * sizeof(double))
    st.gen = <long *> malloc(n * sizeof(long))
    st.seen_epoch = <int *> malloc(n * sizeof(int))
    cdef int *touched = <int *> malloc(n * sizeof(int))
    st.heap_cap = n + 64
    st.heap_len = 0
    st.heap = <HeapEntry *> malloc(st.heap_cap * sizeof(HeapEntry))
    st.rev = NULL
    if (st.adj == NULL or st.rev_ptr == NULL or st.gaps == NULL or st.x == NULL
            or st.mode_count == NULL or st.mode_key == NULL or st.mode_value == NULL
            or st.gen == NULL or st.seen_epoch == NULL or touched == NULL
            or st.heap == NULL):
        _free_state(&st, touched)
        raise MemoryError()
    try:
        for j in range(n):
            row = adj[j]
            for t in range(d):
                st.adj[<Py_ssize_t> j * d + t] = row[t]
            st.x[j] = 0.0
            st.gen[j] = 0
            st.seen_epoch[j] = -1
        st.rev_ptr[0] = 0
        for i in range(m):
            st.rev_ptr[i + 1] = st.rev_ptr[i] + len(rev[i])
        total = st.rev_ptr[m]
        st.rev = <int *> malloc(total * sizeof(int) if total else sizeof(int))
        if st.rev == NULL:
            raise MemoryError()
        for i in range(m):
            row = rev[i]
            pos = st.rev_ptr[i]
            for t in range(len(row)):
                st.rev[pos + t] = row[t]
        st.support = 0
        for i in range(m):
            st.gaps[i] = y[i]
            if _key(&st, st.gaps[i]) != 0.0:
                st.support += 1
        for j in range(n):
            _refresh_node(&st, j)

        trace = []
        epoch = 0
        while True:
            if st.support == 0:
                status = STATUS_RECOVERED
                break
            if iters >= max_iters:
                status = STATUS_ITERATION_CAP
                break
            j = _peek(&st)
            if j < 0 or st.mode_count[j] < threshold:
                status = STATUS_STUCK
                break
            value = st.mode_value[j]
            before = st.support
            # apply the fix x_j += value
            st.x[j] += value
            touched_len = 0
            st.seen_epoch[j] = epoch
            touched[touched_len] = j
            touched_len += 1
            for t in range(d):
                i = st.adj[<Py_ssize_t> j * d + t]
                old = st.gaps[i]
                new = old - value
                if _key(&st, old) != 0.0:
                    if _key(&st, new) == 0.0:
                        st.support -= 1
                elif _key(&st, new) != 0.0:
                    st.support += 1
                st.gaps[i] = new
                for w in range(st.rev_ptr[i], st.rev_ptr[i + 1]):
                    if st.seen_epoch[st.rev[w]] != epoch:
                        st.seen_epoch[st.rev[w]] = epoch
                        touched[touched_len] = st.rev[w]
                        touched_len += 1
            for t in range(touched_len):
                _refresh_node(&st, touched[t])
            epoch += 1
            iters += 1
            trace.append((iters, j, value, before, st.support))

        estimate = {}
        for j in range(n):
            if st.x[j] != 0.0:
                estimate[j] = st.x[j]
        return estimate, trace, status
    finally:
        _free_state(&st, touched)


cdef void _free_state(DecoderState *st, int *touched) nogil:
    free(st.adj); free(st.rev_ptr); free(st.rev); free(st.gaps); free(st.x)
    free(st.mode_count); free(st.mode_key); free(st.mode_value); free(st.gen)
    free(st.seen_epoch); free(st.heap); free(touched)
