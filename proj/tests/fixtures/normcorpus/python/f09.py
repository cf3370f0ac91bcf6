# nested loop with comments sprinkled in
for row in range(3):
    # the row header
    cells = []
    for col in range(4):
        cells.append(row * col)
    print(cells)
