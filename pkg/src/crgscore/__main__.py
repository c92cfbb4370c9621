from crgscore.cli import main

raise SystemExit(main())
