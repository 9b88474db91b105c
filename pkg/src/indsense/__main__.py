from indsense.cli import main

main()
