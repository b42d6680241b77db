#pragma once

// libtorch's logging headers define glog-style CHECK/CHECK_EQ/... macros
// that abort on failure. Include this header *after* all torch-touching
// project headers so doctest's assertion macros win inside the tests.
#ifdef CHECK
#undef CHECK
#endif
#ifdef CHECK_EQ
#undef CHECK_EQ
#endif
#ifdef CHECK_NE
#undef CHECK_NE
#endif
#ifdef CHECK_LT
#undef CHECK_LT
#endif
#ifdef CHECK_LE
#undef CHECK_LE
#endif
#ifdef CHECK_GT
#undef CHECK_GT
#endif
#ifdef CHECK_GE
#undef CHECK_GE
#endif

#include <doctest.h>
