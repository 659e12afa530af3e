#ifndef METAVAULT_H
#define METAVAULT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Selects the relational backend.
#define MV_BACKEND_RELATIONAL 0

// Selects the document backend.
#define MV_BACKEND_DOCUMENT 1

typedef enum MvStatus {
  MV_STATUS_OK = 0,
  MV_STATUS_NULL_ARGUMENT = 1,
  MV_STATUS_INVALID_UTF8 = 2,
  // Query text or manifest did not parse.
  MV_STATUS_PARSE = 3,
  // Bad input data or an I/O failure.
  MV_STATUS_DATA = 4,
  // Stored records broke an integrity rule or are corrupt.
  MV_STATUS_INTEGRITY = 5,
  MV_STATUS_SCHEMA = 6,
  // Unknown entity or attribute.
  MV_STATUS_NOT_FOUND = 7,
  // The operation needs the other backend.
  MV_STATUS_UNSUPPORTED = 8,
  MV_STATUS_PANIC = 99,
} MvStatus;

// A catalog over one backend. Opaque to C.
typedef struct MvCatalog MvCatalog;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an in-memory catalog holding the default schema.
//
// # Safety
// `out` must be a valid pointer to write the handle to.
enum MvStatus mv_catalog_new(uint32_t backend, struct MvCatalog **out);

// Opens a catalog saved in `dir` by [`mv_catalog_save`] or the CLI.
//
// # Safety
// `dir` must be a NUL-terminated string and `out` a valid pointer.
enum MvStatus mv_catalog_open(uint32_t backend, const char *dir, struct MvCatalog **out);

// Writes the catalog's on-disk layout into `dir`.
//
// # Safety
// `catalog` must come from this library and `dir` be NUL-terminated.
enum MvStatus mv_catalog_save(const struct MvCatalog *catalog, const char *dir);

// Releases a catalog. Null is ignored.
//
// # Safety
// `catalog` must come from this library and not be used afterwards.
void mv_catalog_free(struct MvCatalog *catalog);

// Ingests every source listed in a corpus manifest.
//
// Load times start at `load_time_ms` (epoch milliseconds) and advance by
// one per document. Documents that fail to extract are skipped and counted
// in `failures_out`. Either out pointer may be null.
//
// # Safety
// `catalog` must come from this library, `manifest` be NUL-terminated and
// non-null out pointers valid.
enum MvStatus mv_catalog_ingest(struct MvCatalog *catalog,
                                const char *manifest,
                                int64_t load_time_ms,
                                uint64_t *links_out,
                                uint64_t *failures_out);

// Number of document links stored.
//
// # Safety
// `catalog` must come from this library and `out` be valid.
enum MvStatus mv_catalog_link_count(const struct MvCatalog *catalog, uint64_t *out);

// Runs a query and returns its rows as JSON lines, one row per line.
//
// # Safety
// `catalog` must come from this library, `expr` be NUL-terminated and
// `out` valid. The result must be released with [`mv_string_free`].
enum MvStatus mv_catalog_query(const struct MvCatalog *catalog,
                               const char *expr,
                               bool two_phase,
                               char **out);

// Document-model JSON export of one entity, or of all when `entity` is null.
// Only document catalogs support it.
//
// # Safety
// `catalog` must come from this library, `entity` be null or
// NUL-terminated and `out` valid. Release the result with [`mv_string_free`].
enum MvStatus mv_catalog_export(const struct MvCatalog *catalog, const char *entity, char **out);

// Per-entity storage accounting as CSV.
//
// # Safety
// `catalog` must come from this library and `out` be valid. Release the
// result with [`mv_string_free`].
enum MvStatus mv_catalog_storage_report_csv(const struct MvCatalog *catalog, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void mv_string_free(char *s);

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call on the same thread.
const char *mv_last_error_message(void);

// Library version as a static string.
const char *mv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METAVAULT_H */
