import sys

from adeqnn.cli import main

sys.exit(main())
