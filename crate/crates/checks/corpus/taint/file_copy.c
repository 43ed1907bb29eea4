int main(int fp) {
    char data[128];
    char dst[16];
    fread(data, 1, 128, fp); // source:a
    strcpy(dst, data); // sink:a
    return 0;
}
