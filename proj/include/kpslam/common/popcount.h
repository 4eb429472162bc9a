#pragma once

// Hot Hamming loops get a hardware-popcount clone selected at load time;
// the default clone keeps the binary portable. Needs ifunc support.
#if defined(__x86_64__) && defined(__GNUC__) && defined(__linux__)
#define KPSLAM_POPCNT_CLONES __attribute__((target_clones("popcnt", "default")))
#else
#define KPSLAM_POPCNT_CLONES
#endif
