/* Compiles the public header as C and runs a round trip through it. */
#include <stdio.h>
#include <string.h>

#include "macrodt/macrodt.h"

int main(void) {
  mdt_tree* tree = NULL;
  char* text = NULL;
  int64_t ranks[4] = {1, 4, 2, 3};
  int ok;

  if (mdt_tree_from_ranks(5, ranks, 4, MDT_TOP_DOWN, &tree) != MDT_OK) {
    fprintf(stderr, "from_ranks: %s\n", mdt_last_error());
    return 1;
  }
  if (mdt_tree_text(tree, &text) != MDT_OK) return 1;
  ok = strcmp(text, "((0 1) ((2 3) 4))") == 0;
  printf("%s %s\n", mdt_version(), text);
  mdt_string_free(text);
  mdt_tree_free(tree);
  return ok ? 0 : 1;
}
