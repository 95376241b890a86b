/* SPDX-License-Identifier: Apache-2.0 */
#ifndef PACTREE_EXPORT_H
#define PACTREE_EXPORT_H

#if defined(_WIN32)
#  if defined(PACTREE_BUILDING_LIBRARY)
#    define PACTREE_API __declspec(dllexport)
#  else
#    define PACTREE_API __declspec(dllimport)
#  endif
#else
#  define PACTREE_API __attribute__((visibility("default")))
#endif

#endif /* PACTREE_EXPORT_H */
