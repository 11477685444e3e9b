import sys

from fracsheet.cli import main

sys.exit(main())
