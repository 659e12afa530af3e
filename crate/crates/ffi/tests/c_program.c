#include <stdio.h>
#include <string.h>

#include "metavault.h"

static int fail(const char *what, MvStatus status) {
    const char *msg = mv_last_error_message();
    fprintf(stderr, "%s: status %d: %s\n", what, (int)status, msg ? msg : "(none)");
    return 1;
}

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: %s MANIFEST\n", argv[0]);
        return 2;
    }
    MvCatalog *catalog = NULL;
    MvStatus status = mv_catalog_new(MV_BACKEND_DOCUMENT, &catalog);
    if (status != MV_STATUS_OK) return fail("new", status);

    uint64_t links = 0, failures = 0;
    status = mv_catalog_ingest(catalog, argv[1], 0, &links, &failures);
    if (status != MV_STATUS_OK) return fail("ingest", status);

    char *rows = NULL;
    status = mv_catalog_query(catalog, "Sat_Location.Address = Tourcoing and category is book", false, &rows);
    if (status != MV_STATUS_OK) return fail("query", status);
    size_t lines = 0;
    for (const char *p = rows; *p; p++) lines += *p == '\n';
    mv_string_free(rows);

    status = mv_catalog_query(catalog, "Sat_Nope.X = y", false, &rows);
    if (status != MV_STATUS_NOT_FOUND) return fail("unknown satellite", status);

    printf("version=%s links=%llu failures=%llu rows=%zu\n", mv_version(), (unsigned long long)links,
           (unsigned long long)failures, lines);
    mv_catalog_free(catalog);
    return 0;
}
